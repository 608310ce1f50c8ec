# %% [markdown]
# # From a PR proof to plain LRAT
#
# A propagation-redundant step comes with a witness assignment. Checkers that
# only know LRAT cannot use it, so `from_pr` rewrites each such step into a
# handful of RAT and unit steps over one fresh variable.

# %%
import io

from fratkit import check_lrat, elaborate_bytes
from fratkit.clauses import InputFormula
from fratkit.convert import dpr_to_frat, from_pr

# The lemma (-4) carries the witness {-4, -3}: a model that sets 4 can be
# repaired by flipping both 4 and 3. After it, the empty clause is RUP.
formula = InputFormula([(-2, 4), (2, -3), (-1, -3), (2, 3), (-3, -4), (3, -4)], 4, 6)
dpr = b"-4 -4 -3 0\n0\n"

# %% Keep the witness: the output is LPR.
frat_lpr = io.BytesIO()
dpr_to_frat(formula, dpr, frat_lpr)
lpr, rep = elaborate_bytes(frat_lpr.getvalue(), formula)
print(rep.dialect)
print(lpr)
print(check_lrat(formula, lpr))

# %% Translate the witness away: the output is LRAT with one extra variable.
frat_plain = io.BytesIO()
summary = from_pr(formula, dpr, frat_plain)
lrat, rep = elaborate_bytes(frat_plain.getvalue(), formula)
print(rep.dialect, "-", summary.pr_translated, "PR step rewritten")
print(lrat)
print(check_lrat(formula, lrat))
