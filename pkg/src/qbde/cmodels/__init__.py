"""Classical baselines: epsilon-SVR (SMO), random forest, MLP, grid search."""

from .forest import RandomForestModel, RegressionTree, fit_tree, rf_fit, rf_predict
from .gridsearch import GridSearchResult, grid_search, model_fitter, quantile_folds
from .mlp import MLPModel, loss_and_grad, mlp_fit, mlp_predict
from .svr import KernelMatrix, SVRModel, kkt_residual, rbf_kernel, smo_solve, svr_fit, svr_predict

__all__ = [
    "GridSearchResult", "KernelMatrix", "MLPModel", "RandomForestModel", "RegressionTree",
    "SVRModel", "fit_tree", "grid_search", "kkt_residual", "loss_and_grad", "mlp_fit",
    "mlp_predict", "model_fitter", "quantile_folds", "rbf_kernel", "rf_fit", "rf_predict",
    "smo_solve", "svr_fit", "svr_predict",
]
