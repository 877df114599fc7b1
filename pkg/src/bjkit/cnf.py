"""CNF data model, DIMACS text format, random 3-SAT generation, and
brute-force oracles used as ground truth in tests.

Literals are `(polarity, var_id)` pairs: `(True, 3)` is the positive
occurrence of variable 3, `(False, 3)` its negation.  Variable ids are
1-based.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional

Lit = tuple[bool, int]
Clause = list[Lit]
Model = dict[int, bool]

BRUTE_FORCE_VAR_LIMIT = 24


class DimacsError(ValueError):
    """Malformed DIMACS input."""


@dataclass
class CnfInstance:
    """A CNF formula: variable count plus a list of non-empty clauses.

    `trivially_unsat` is set when the source text contained an empty
    clause; such clauses never enter `clauses`.  `tautologies_dropped`
    counts input clauses removed because they contained a variable with
    both polarities.
    """

    var_count: int
    clauses: list[Clause] = field(default_factory=list)
    trivially_unsat: bool = False
    tautologies_dropped: int = 0

    def validate(self) -> None:
        if self.var_count < 0:
            raise ValueError("variable count must be non-negative")
        for clause in self.clauses:
            if not clause:
                raise ValueError("clauses must be non-empty")
            seen = set()
            for pol, vid in clause:
                if not isinstance(pol, bool) or not 1 <= vid <= self.var_count:
                    raise ValueError(f"literal ({pol}, {vid}) out of range")
                if vid in seen:
                    raise ValueError(f"variable {vid} repeated within a clause")
                seen.add(vid)


def _normalise_clause(lits: list[int]) -> Optional[Clause]:
    """Collapse duplicate literals; return None for tautological clauses."""
    pols: dict[int, bool] = {}
    order: list[int] = []
    for lit in lits:
        vid = abs(lit)
        pol = lit > 0
        if vid in pols:
            if pols[vid] != pol:
                return None
        else:
            pols[vid] = pol
            order.append(vid)
    return [(pols[vid], vid) for vid in order]


def parse_dimacs(text: str) -> CnfInstance:
    """Parse DIMACS CNF text.

    Accepts 'c' comment lines, clauses spanning multiple lines, and the
    SATLIB trailer (a '%' line, after which the rest of the input is
    ignored).  The mandatory header's declared clause count is checked
    against the number of clauses actually read.  An empty clause in the
    input marks the instance as trivially unsatisfiable rather than being
    stored.
    """
    var_count: Optional[int] = None
    declared_clauses = 0
    raw_clause: list[int] = []
    clauses_read = 0
    kept: list[Clause] = []
    tautologies = 0
    trivially_unsat = False

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("%"):
            break
        if stripped.startswith("p"):
            if var_count is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            parts = stripped.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: bad header {stripped!r}")
            try:
                var_count = int(parts[2])
                declared_clauses = int(parts[3])
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: bad header counts") from exc
            if var_count < 0 or declared_clauses < 0:
                raise DimacsError(f"line {lineno}: negative header counts")
            continue
        if var_count is None:
            raise DimacsError(f"line {lineno}: clause data before 'p cnf' header")
        for token in stripped.split():
            try:
                lit = int(token)
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: bad token {token!r}") from exc
            if lit == 0:
                clauses_read += 1
                if not raw_clause:
                    trivially_unsat = True
                else:
                    clause = _normalise_clause(raw_clause)
                    if clause is None:
                        tautologies += 1
                    else:
                        kept.append(clause)
                raw_clause = []
            else:
                if abs(lit) > var_count:
                    raise DimacsError(
                        f"line {lineno}: literal {lit} out of range 1..{var_count}"
                    )
                raw_clause.append(lit)

    if var_count is None:
        raise DimacsError("missing 'p cnf' header")
    if raw_clause:
        raise DimacsError("unterminated clause at end of input")
    if clauses_read != declared_clauses:
        raise DimacsError(
            f"header declares {declared_clauses} clauses but {clauses_read} found"
        )
    return CnfInstance(
        var_count=var_count,
        clauses=kept,
        trivially_unsat=trivially_unsat,
        tautologies_dropped=tautologies,
    )


def emit_dimacs(instance: CnfInstance) -> str:
    """Serialise to canonical DIMACS; inverse of parse on canonical input."""
    lines = [f"p cnf {instance.var_count} {len(instance.clauses)}"]
    for clause in instance.clauses:
        lits = " ".join(str(vid if pol else -vid) for pol, vid in clause)
        lines.append(f"{lits} 0")
    return "\n".join(lines) + "\n"


def gen_random_3sat(n: int, m: int, seed: int) -> CnfInstance:
    """Random 3-SAT: m clauses over n variables, deterministic in seed.

    Each clause draws 3 distinct variables uniformly and gives each an
    independent uniform polarity.
    """
    if n < 3:
        raise ValueError("need at least 3 variables for 3-SAT clauses")
    rng = random.Random(seed)
    clauses: list[Clause] = []
    for _ in range(m):
        vids = rng.sample(range(1, n + 1), 3)
        clauses.append([(bool(rng.getrandbits(1)), vid) for vid in vids])
    return CnfInstance(var_count=n, clauses=clauses)


def _lit_true(lit: Lit, model: Model) -> bool:
    pol, vid = lit
    return model[vid] == pol


def satisfies(instance: CnfInstance, model: Model) -> bool:
    """True iff the total assignment satisfies every clause."""
    return all(any(_lit_true(lit, model) for lit in clause) for clause in instance.clauses)


def brute_force(instance: CnfInstance) -> Optional[Model]:
    """Exhaustive model search in lexicographic order (False before True).

    Guarded to at most 24 variables; this is the test oracle, not a
    solver.
    """
    if instance.var_count > BRUTE_FORCE_VAR_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_VAR_LIMIT} variables")
    if instance.trivially_unsat:
        return None
    vids = range(1, instance.var_count + 1)
    for values in product((False, True), repeat=instance.var_count):
        model = dict(zip(vids, values))
        if satisfies(instance, model):
            return model
    return None


def brute_force_models(instance: CnfInstance) -> list[Model]:
    """All models, lexicographic order; same guard as `brute_force`."""
    if instance.var_count > BRUTE_FORCE_VAR_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_VAR_LIMIT} variables")
    if instance.trivially_unsat:
        return []
    vids = range(1, instance.var_count + 1)
    out = []
    for values in product((False, True), repeat=instance.var_count):
        model = dict(zip(vids, values))
        if satisfies(instance, model):
            out.append(model)
    return out


def entails(instance: CnfInstance, clause: Iterable[Lit]) -> bool:
    """True iff `clause` holds in every model of `instance`.

    Checked by refutation: conjoin the negation of the clause as unit
    clauses and brute-force the result.
    """
    clause = list(clause)
    var_count = max([instance.var_count] + [vid for _, vid in clause])
    combined = CnfInstance(
        var_count=var_count,
        clauses=[list(c) for c in instance.clauses]
        + [[(not pol, vid)] for pol, vid in clause],
        trivially_unsat=instance.trivially_unsat,
    )
    return brute_force(combined) is None
