# %% [markdown]
# # Elaborating a small FRAT proof
#
# A 4-variable formula with 8 clauses, refuted by a solver that wrote a FRAT
# proof with hints on only some of its lemmas. We turn it into LRAT and check it.

# %%
from pathlib import Path

from fratkit import check_lrat, elaborate_bytes, parse_dimacs
from fratkit.frat import parse_steps

data = Path(__file__).resolve().parent.parent / "tests" / "data"
formula = parse_dimacs(data / "example.cnf")
proof = (data / "example.frat").read_bytes()
print(formula.num_vars, "vars,", formula.num_clauses, "clauses")

# %% Which lemmas came without hints?
for step in parse_steps(proof):
    if step.kind == "a":
        print(step.id, step.clause, "hint" if step.hint else "-")

# %% Elaborate. Pass 1 runs backwards from the empty clause, pass 2 renumbers.
lrat, report = elaborate_bytes(proof, formula)
print(lrat)
print("derived hints:", report.hints_derived, " peak active:", report.high_water)

# %% The result replays step by step with no search.
print(check_lrat(formula, lrat))
