"""Shapley-value explanations: exact TreeSHAP, KernelSHAP and a brute-force oracle."""
from .bruteforce import brute_force_shap, coalition_masks, shapley_from_game, tree_game_values
from .explain import (Explanation, explain_dataset, read_explanation_csv, select_background,
                      write_explanation_csv, write_prediction_csv)
from .kernel import default_coalitions, kernel_shap, masked_game, shapley_kernel
from .treeshap import expected_value, forest_shap, tree_shap

__all__ = [
    "Explanation", "brute_force_shap", "coalition_masks", "default_coalitions", "expected_value",
    "explain_dataset", "forest_shap", "kernel_shap", "masked_game", "read_explanation_csv",
    "select_background", "shapley_from_game", "shapley_kernel", "tree_game_values", "tree_shap",
    "write_explanation_csv", "write_prediction_csv",
]
