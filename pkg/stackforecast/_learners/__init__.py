from .baseline import combine_mean, combine_median
from .forest import Forest, RegressionTree, rf_fit, rf_predict
from .knn import KnnConfig, knn_combine, knn_weights
from .linear import LinearCoeffs, lr_combine, lr_fit
from .lstm import LstmModel, lstm_fit, lstm_predict
from .mlp import MlpModel, mlp_fit, mlp_predict
