# %% [markdown]
# Regression on the synthetic employee-risk data
#
# Eight regressors fitted on a standardized train split, scored on the
# held-out rows. The label is a nonlinear function of six of the 28
# columns, so kernel and ensemble models should beat the linear ones.

# %%
import numpy as np

from riskscope import regress
from riskscope.dataset import generate_synthetic, standardize, train_test_split
from riskscope.metrics import evaluate

raw = generate_synthetic(991, seed=7)
data, scaler = standardize(raw)
split = train_test_split(data, test_fraction=0.1, seed=7)
print(f"{len(split.train)} train rows, {len(split.test)} test rows, {data.x.shape[1]} features")
print(f"risk factor range: {raw.y.min():.2f} .. {raw.y.max():.2f}")

# %%
# KNN and the penalised models get a small validation sweep first.
base = regress.Hyperparams(forest_n_trees=50)
train = split.train
tuned = {
    "knn": regress.tune_knn(train.x, train.y, regress.DEFAULT_KNN_CANDIDATES, 7, base),
    "lasso": regress.tune_alpha(train.x, train.y, "lasso", regress.DEFAULT_ALPHAS, 7, base),
    "ridge": regress.tune_alpha(train.x, train.y, "ridge", regress.DEFAULT_ALPHAS, 7, base),
}
print("k =", tuned["knn"].knn_k, " lasso alpha =", tuned["lasso"].alpha,
      " ridge alpha =", tuned["ridge"].alpha)

# %%
print(f"{'Models':<22}{'MAE':>8}{'MSE':>8}{'R2':>8}")
for kind in regress.KINDS:
    model = regress.fit(kind, train.x, train.y, tuned.get(kind, base))
    r = evaluate(model, split.test)
    print(f"{regress.MODEL_LABELS[kind]:<22}{r.mae:>8.3f}{r.mse:>8.3f}{r.r2:>8.3f}")

# %%
# Fitted models serialise to JSON and predict identically after reloading.
svr = regress.fit("svr_rbf", train.x, train.y, base)
again = regress.ModelFit.from_json(svr.to_json())
assert np.array_equal(regress.predict(svr, split.test.x), regress.predict(again, split.test.x))
print("support vectors:", svr.diagnostics["n_support"], "converged:", svr.diagnostics["converged"])
