"""ADC-aware decision trees lowered to bespoke unary flash-ADC classifiers."""

from .adc import AdcSpec, derive_adcs, simulate_adc
from .cost import CostModelParams, HardwareReport, fit_default_params, load_params, report
from .dataset import QuantizedDataset, RawDataset, load_csv, quantize, split_train_test
from .explorer import ExplorationGrid, ExplorationResult, run_baseline_selection, run_sweep
from .netlist import Netlist, emit, simulate_netlist
from .trainer import DecisionTree, accuracy, predict, train_adc_aware, train_baseline
from .unary import LabelLogic, evaluate_logic, lower_tree

__version__ = "0.1.0"

__all__ = [
    "AdcSpec",
    "CostModelParams",
    "DecisionTree",
    "ExplorationGrid",
    "ExplorationResult",
    "HardwareReport",
    "LabelLogic",
    "Netlist",
    "QuantizedDataset",
    "RawDataset",
    "accuracy",
    "derive_adcs",
    "emit",
    "evaluate_logic",
    "fit_default_params",
    "load_csv",
    "load_params",
    "lower_tree",
    "predict",
    "quantize",
    "report",
    "run_baseline_selection",
    "run_sweep",
    "simulate_adc",
    "simulate_netlist",
    "split_train_test",
    "train_adc_aware",
    "train_baseline",
]
