# %% [markdown]
# Which columns drive the risk factor?
#
# Two views: magnitude of linear coefficients, and recursive feature
# elimination (drop the weakest column, refit, repeat) down to two survivors.

# %%
from riskscope import regress
from riskscope.dataset import SIGNAL_FEATURES, generate_synthetic, standardize
from riskscope.select import rank_by_coefficients, rfe

data, _ = standardize(generate_synthetic(400, seed=7))
names = data.feature_names
print("columns the synthetic label depends on:")
for j in SIGNAL_FEATURES:
    print("  ", names[j])

# %%
ols = regress.fit_ols(data.x, data.y)
ranking = rank_by_coefficients(ols, names)
print("\ntop 5 by |OLS coefficient|")
for f in ranking.features[:5]:
    print(f"  {f.rank}. {f.name:<40} {f.score:.3f}")

# %%
# RFE with a small forest; feature importances are SSE reductions.
h = regress.Hyperparams(forest_n_trees=20, forest_seed=0)
r = rfe("forest", h, data, n_target=2)
print(f"\nRFE survivors after {r.n_rounds} rounds:", r.top(2))
print("first column eliminated:", r.features[-1].name)
r.write_csv("rfe_forest.csv")
