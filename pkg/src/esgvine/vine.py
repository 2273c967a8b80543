"""The five-tree regular vine over assets, ESG class indices and the market.

Variables are named by asset id, ``I_A`` ... ``I_D`` for the class
indices and ``I_M`` for the market index. An :class:`Edge` couples two
conditioned variables given a conditioning set; copula argument one is
``F(a | given)`` and argument two is ``F(b | given)``.

Template for an asset ``x`` of class ``k`` (``p3``, ``p4``, ``p5`` are the
other three classes in the order listed below)::

    tree 1   (x, k)              (k, M)
    tree 2   (x, M | k)          (A, B | M) (B, C | M) (C, D | M)
    tree 3   (x, p3 | k, M)      (A, C | M, B) (B, D | M, C)
    tree 4   (x, p4 | k, M, p3)  (A, D | M, B, C)
    tree 5   (x, p5 | k, M, p3, p4)

    class   p3  p4  p5
      A      B   C   D
      B      C   A   D
      C      B   D   A
      D      C   B   A

Pair copulas beyond tree 5 are independence (truncation).
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .copula.fitting import CopulaFitError, empirical_tau, fit_pair, get_catalog
from .copula.pair import PairCopula

MARKET = "I_M"
INDEX = {"A": "I_A", "B": "I_B", "C": "I_C", "D": "I_D"}
INDEX_NAMES = tuple(INDEX.values())
TRUNCATION = 5
# partners of an asset beyond its own index and the market, per class
PARTNERS = {"A": ("B", "C", "D"), "B": ("C", "A", "D"), "C": ("B", "D", "A"), "D": ("C", "B", "A")}
CATALOG_ABBREV = {"itau": "itau", "parametric": "par", "gaussian": "gaus"}


class VineFitError(RuntimeError):
    """A pair-copula fit failed; the message names the edge."""


@dataclass(frozen=True, order=True)
class Edge:
    """Pair copula slot ``(a, b | given)`` in tree ``tree``."""

    tree: int
    a: str
    b: str
    given: Tuple[str, ...] = ()

    @property
    def conditioned(self):
        return frozenset((self.a, self.b))

    @property
    def complete(self):
        return frozenset((self.a, self.b) + tuple(self.given))

    def __str__(self):
        g = ",".join(self.given)
        return f"{self.a},{self.b}|{g}" if g else f"{self.a},{self.b}"

    @classmethod
    def parse(cls, text, tree=None):
        pair, _, given = text.partition("|")
        a, b = (s.strip() for s in pair.split(","))
        given = tuple(s.strip() for s in given.split(",") if s.strip())
        return cls(len(given) + 1 if tree is None else tree, a, b, given)


@dataclass(frozen=True)
class VineStructure:
    """Nodes and tree-wise edge lists of a (truncated) regular vine."""

    nodes: Tuple[str, ...]
    trees: Tuple[Tuple[Edge, ...], ...]
    membership: Dict[str, str] = field(default_factory=dict, compare=False)

    @property
    def edges(self):
        return [e for t in self.trees for e in t]

    @property
    def n_edges(self):
        return sum(len(t) for t in self.trees)

    @property
    def truncation_level(self):
        return len(self.trees)

    def edge_counts(self):
        return [len(t) for t in self.trees]

    def edges_of(self, var):
        return [e for e in self.edges if var in (e.a, e.b)]


def build_structure(membership) -> VineStructure:
    """Instantiate the five-tree template for a class membership.

    Parameters
    ----------
    membership : dict
        Asset id to class label ``"A"``-``"D"``.

    Raises
    ------
    ValueError
        A class is empty, a label is unknown, or an asset id collides with
        an index name.
    """
    membership = {str(a): k for a, k in membership.items()}
    for a, k in membership.items():
        if k not in INDEX:
            raise ValueError(f"asset {a}: unknown class {k!r}")
        if a in INDEX_NAMES or a == MARKET:
            raise ValueError(f"asset id {a!r} collides with an index variable name")
    for k in INDEX:
        if k not in membership.values():
            raise ValueError(f"ESG class {k} has no members")
    assets = sorted(membership)
    A, B, C, D, M = INDEX["A"], INDEX["B"], INDEX["C"], INDEX["D"], MARKET
    idx_edges = {
        1: [Edge(1, A, M), Edge(1, B, M), Edge(1, C, M), Edge(1, D, M)],
        2: [Edge(2, A, B, (M,)), Edge(2, B, C, (M,)), Edge(2, C, D, (M,))],
        3: [Edge(3, A, C, (M, B)), Edge(3, B, D, (M, C))],
        4: [Edge(4, A, D, (M, B, C))],
        5: [],
    }
    trees = []
    for m in range(1, TRUNCATION + 1):
        level = list(idx_edges[m])
        for x in assets:
            k = membership[x]
            chain = [INDEX[k], M] + [INDEX[p] for p in PARTNERS[k]]
            level.append(Edge(m, x, chain[m - 1], tuple(chain[:m - 1])))
        trees.append(tuple(level))
    nodes = tuple(assets) + INDEX_NAMES + (M,)
    structure = VineStructure(nodes, tuple(trees), dict(membership))
    validate_proximity(structure)
    return structure


def _is_spanning_tree(vertices, links):
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for x, y in links:
        rx, ry = find(x), find(y)
        if rx == ry:
            return False
        parent[rx] = ry
    return len(links) == len(vertices) - 1


def validate_proximity(structure: VineStructure):
    """Check the regular-vine conditions tree by tree.

    Tree 1 must be a spanning tree on the nodes. Every edge of tree
    ``m + 1`` must join two edges of tree ``m`` that share ``m - 1``
    variables of their complete sets (the proximity condition), its
    conditioned pair being their symmetric difference and its conditioning
    set their intersection; the joins must form a spanning tree on the
    edges of tree ``m`` while trees remain complete.

    Raises
    ------
    ValueError
        Naming the first violating edge.
    """
    if not structure.trees:
        return True
    nodes = set(structure.nodes)
    t1 = structure.trees[0]
    for e in t1:
        if e.given or e.a not in nodes or e.b not in nodes or e.a == e.b:
            raise ValueError(f"tree 1 edge {e} is not a plain node pair")
    if not _is_spanning_tree(nodes, [(e.a, e.b) for e in t1]):
        raise ValueError("tree 1 is not a spanning tree on the nodes")
    for m in range(1, len(structure.trees)):
        prev = {e.complete: e for e in structure.trees[m - 1]}
        links = []
        for e in structure.trees[m]:
            if len(e.given) != m or len(e.complete) != m + 2:
                raise ValueError(f"tree {m + 1} edge {e}: conditioning set must have {m} distinct variables")
            left = frozenset((e.a,) + e.given)
            right = frozenset((e.b,) + e.given)
            if left not in prev or right not in prev:
                raise ValueError(f"proximity violated: tree {m + 1} edge {e} has no parent edges in tree {m}")
            pl, pr = prev[left], prev[right]
            shared = pl.complete & pr.complete
            if len(shared) != m or shared != frozenset(e.given):
                raise ValueError(f"proximity violated: parents of {e} do not share its conditioning set")
            links.append((pl.complete, pr.complete))
        # a full tree m+1 spans tree m; truncated templates have exactly that many edges too
        if len(structure.trees[m]) == len(prev) - 1 and not _is_spanning_tree(set(prev), links):
            raise ValueError(f"tree {m + 1} is not a spanning tree on the edges of tree {m}")
        if len(structure.trees[m]) > len(prev) - 1:
            raise ValueError(f"tree {m + 1} has too many edges")
    return True


# -- model -----------------------------------------------------------------------

@dataclass
class VineModel:
    """A vine structure with one pair copula per edge.

    Attributes
    ----------
    structure : VineStructure
    copulas : dict
        Edge to fitted :class:`PairCopula`.
    nobs : int
    catalog_name : str
    period : str, optional
    empirical_tau : dict
        Edge to Kendall's tau of the conditional pseudo-observations the
        edge was fitted on.
    """

    structure: VineStructure
    copulas: Dict[Edge, PairCopula]
    nobs: int = 0
    catalog_name: str = ""
    period: Optional[str] = None
    empirical_tau: Dict[Edge, float] = field(default_factory=dict)

    def copula(self, edge) -> PairCopula:
        return self.copulas[edge]

    @property
    def loglik(self):
        return float(math.fsum(pc.loglik or 0.0 for pc in self.copulas.values()))

    @property
    def npars(self):
        return int(sum(pc.n_params for pc in self.copulas.values()))

    @property
    def aic(self):
        return -2.0 * self.loglik + 2.0 * self.npars

    @property
    def bic(self):
        return -2.0 * self.loglik + self.npars * math.log(self.nobs) if self.nobs else -2.0 * self.loglik

    def mbic(self, psi0=0.9):
        return mbic(self, psi0)


def mbic(model: VineModel, psi0=0.9):
    """Modified BIC for sparse vines.

    ``-2 loglik + npars log(nobs) - 2 sum_m [q_m log psi0**m + (e_m - q_m) log(1 - psi0**m)]``
    where ``e_m`` counts the edges of tree ``m`` and ``q_m`` its
    non-independence edges.
    """
    if not 0.0 < psi0 < 1.0:
        raise ValueError(f"psi0 must lie in (0, 1), got {psi0}")
    out = -2.0 * model.loglik
    if model.npars:
        out += model.npars * math.log(model.nobs)
    for m, tree in enumerate(model.structure.trees, start=1):
        e_m = len(tree)
        q_m = sum(not model.copulas[e].is_independence for e in tree)
        p = psi0 ** m
        out -= 2.0 * (q_m * math.log(p) + (e_m - q_m) * math.log1p(-p))
    return float(out)


# -- data handling ---------------------------------------------------------------

def _columns(u_data, structure):
    if isinstance(u_data, pd.DataFrame):
        missing = [v for v in structure.nodes if v not in u_data.columns]
        if missing:
            raise ValueError(f"u-data lacks columns for {missing}")
        cols = {v: u_data[v].to_numpy(dtype=float) for v in structure.nodes}
    elif isinstance(u_data, dict):
        cols = {v: np.asarray(u_data[v], dtype=float) for v in structure.nodes}
    else:
        arr = np.asarray(u_data, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != len(structure.nodes):
            raise ValueError(f"u-data must have {len(structure.nodes)} columns (one per node), got {arr.shape}")
        cols = {v: arr[:, i] for i, v in enumerate(structure.nodes)}
    n = {len(c) for c in cols.values()}
    if len(n) != 1:
        raise ValueError("u-data columns differ in length")
    for v, c in cols.items():
        if np.any(~((c > 0) & (c < 1))):
            raise ValueError(f"u-data column {v} has values outside (0, 1)")
    return cols, n.pop()


def _conditional(store, edge, which):
    """Pseudo-observation ``F(var | given)`` for the ``which`` side of ``edge``."""
    var = edge.a if which == 0 else edge.b
    return store[(var, frozenset(edge.given))]


def _propagate(structure, cols, edge_fn, workers=1):
    """Walk the trees, calling ``edge_fn(edge, u1, u2) -> PairCopula`` per edge.

    Returns the per-edge copulas. h-function outputs feed the next tree.
    """
    store = {(v, frozenset()): c for v, c in cols.items()}
    out = {}
    n_trees = len(structure.trees)
    for m, tree in enumerate(structure.trees, start=1):
        inputs = [(_conditional(store, e, 0), _conditional(store, e, 1)) for e in tree]
        results = edge_fn(tree, inputs, workers)
        for e, (u1, u2), pc in zip(tree, inputs, results):
            out[e] = pc
            if m < n_trees:
                store[(e.a, frozenset(e.given + (e.b,)))] = pc.hfunc2(u1, u2)
                store[(e.b, frozenset(e.given + (e.a,)))] = pc.hfunc1(u1, u2)
    return out


def _fit_one(args):
    edge, u1, u2, catalog = args
    if np.ptp(u1) == 0 or np.ptp(u2) == 0:
        raise VineFitError(f"edge {edge} (tree {edge.tree}): degenerate pseudo-data (constant column)")
    try:
        pc = fit_pair(u1, u2, catalog)
    except (CopulaFitError, ValueError) as exc:
        raise VineFitError(f"edge {edge} (tree {edge.tree}): {exc}") from exc
    return pc, empirical_tau(u1, u2)


def fit_vine(u_data, structure: VineStructure, catalog="itau", workers=1, period=None) -> VineModel:
    """Sequential tree-by-tree fit with per-edge AIC family selection.

    Parameters
    ----------
    u_data : ndarray, DataFrame or dict
        Pseudo-observations; array columns follow ``structure.nodes``.
    structure : VineStructure
    catalog : str or Catalog
    workers : int
        Processes used for the edge fits within a tree. Results do not
        depend on this value.
    period : str, optional
        Label stored on the model.

    Raises
    ------
    VineFitError
        Naming the edge whose fit failed.
    """
    cat = get_catalog(catalog)
    cols, n = _columns(u_data, structure)
    emp = {}

    def edge_fn(tree, inputs, nproc):
        jobs = [(e, u1, u2, cat) for e, (u1, u2) in zip(tree, inputs)]
        if nproc and nproc > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=nproc) as ex:
                res = list(ex.map(_fit_one, jobs, chunksize=max(1, len(jobs) // (4 * nproc))))
        else:
            res = [_fit_one(j) for j in jobs]
        for e, (_, t) in zip(tree, res):
            emp[e] = t
        return [pc for pc, _ in res]

    copulas = _propagate(structure, cols, edge_fn, workers)
    return VineModel(structure, copulas, n, cat.name, period, emp)


def vine_loglik(model: VineModel, u_data, per_edge=False):
    """Log-likelihood of ``u_data`` under a fixed model.

    With ``per_edge=True`` returns a dict edge -> loglik instead.
    """
    cols, _ = _columns(u_data, model.structure)
    ll = {}

    def edge_fn(tree, inputs, _):
        for e, (u1, u2) in zip(tree, inputs):
            ll[e] = model.copulas[e].loglik_of(u1, u2)
        return [model.copulas[e] for e in tree]

    _propagate(model.structure, cols, edge_fn)
    return ll if per_edge else float(math.fsum(ll.values()))


def model_from_copulas(structure, copulas, nobs=0, catalog_name="", period=None):
    """Assemble a model from hand-set pair copulas (missing edges are independence)."""
    full = {e: copulas.get(e, copulas.get(str(e), PairCopula.independence())) for e in structure.edges}
    return VineModel(structure, full, nobs, catalog_name, period)


# -- sampling ----------------------------------------------------------------------

def sampling_order(structure: VineStructure):
    """Variable order for sequential inverse-Rosenblatt sampling.

    Returns a list of ``(var, chain)`` where ``chain`` lists the edges
    linking ``var`` to earlier variables, tree 1 first; the conditioning
    set of the ``j``-th chain edge is the set of partners of the earlier
    chain edges.
    """
    preferred = [MARKET, INDEX["B"], INDEX["C"], INDEX["A"], INDEX["D"]]
    candidates = [v for v in preferred if v in structure.nodes] + \
        [v for v in structure.nodes if v not in preferred]
    done, order = [], []
    pending = list(candidates)
    while pending:
        for v in pending:
            chain = _chain_for(v, set(done), structure)
            if chain is not None:
                break
        else:
            raise ValueError("no valid sampling order for this vine structure")
        order.append((v, chain))
        done.append(v)
        pending.remove(v)
    return order


def _chain_for(v, done, structure):
    scope = done | {v}
    edges = []
    for e in structure.edges:
        if v not in (e.a, e.b):
            continue
        other = e.b if e.a == v else e.a
        if other in done:
            if not set(e.given) <= done:
                return None
            edges.append(e)
    # no edge among sampled variables may condition on something unsampled
    for e in structure.edges:
        if e.conditioned <= scope and not set(e.given) <= scope:
            return None
    edges.sort(key=lambda e: e.tree)
    partners = []
    for j, e in enumerate(edges, start=1):
        if e.tree != j or frozenset(e.given) != frozenset(partners):
            return None
        partners.append(e.b if e.a == v else e.a)
    return edges


def sample_vine(model: VineModel, n, seed=None, return_frame=False):
    """Draw ``n`` observations from the vine copula model.

    Variables are generated one at a time by inverting the h-functions
    along their chain of edges. Pairs without an edge are conditionally
    independent.

    Returns
    -------
    ndarray, shape (n, n_nodes)
        Columns follow ``model.structure.nodes``; a DataFrame if
        ``return_frame``.
    """
    rng = np.random.default_rng(seed)
    structure = model.structure
    order = sampling_order(structure)
    by_pair = {}
    for e in structure.edges:
        by_pair[(e.conditioned, frozenset(e.given))] = e
    cond = {}
    w_all = rng.random((n, len(order)))

    def value(var, given):
        key = (var, given)
        if key in cond:
            return cond[key]
        # find y in given with edge (var, y | given - y)
        for y in sorted(given):
            rest = given - {y}
            e = by_pair.get((frozenset((var, y)), rest))
            if e is None:
                continue
            pc = model.copulas[e]
            if e.a == var:
                out = pc.hfunc2(value(var, rest), value(y, rest))
            else:
                out = pc.hfunc1(value(y, rest), value(var, rest))
            cond[key] = out
            return out
        raise KeyError(f"conditional value of {var} given {sorted(given)} is not reachable")

    for i, (v, chain) in enumerate(order):
        x = w_all[:, i]
        partners = [e.b if e.a == v else e.a for e in chain]
        for j in range(len(chain) - 1, -1, -1):
            e = chain[j]
            given = frozenset(partners[:j])
            other = value(partners[j], given)
            pc = model.copulas[e]
            x = pc.hinv2(x, other) if e.a == v else pc.hinv1(x, other)
            if j:
                cond[(v, given)] = x
        cond[(v, frozenset())] = x
    data = np.column_stack([cond[(v, frozenset())] for v in structure.nodes])
    return pd.DataFrame(data, columns=list(structure.nodes)) if return_frame else data


# -- reporting -------------------------------------------------------------------

COMPARISON_COLUMNS = ["model", "year", "nobs", "logLik", "npars", "mBIC"]


def compare_models(models: List[VineModel], psi0=0.9):
    """Rank fitted models by mBIC (ascending, stable).

    Returns
    -------
    DataFrame
        Columns ``model, year, nobs, logLik, npars, mBIC, rank, best``.
    """
    if not models:
        raise ValueError("compare_models needs at least one model")
    nobs = {m.nobs for m in models}
    if len(nobs) != 1:
        raise ValueError(f"models were fitted on different sample sizes {sorted(nobs)}")
    rows = [{"model": CATALOG_ABBREV.get(m.catalog_name, m.catalog_name), "year": m.period or "",
             "nobs": m.nobs, "logLik": m.loglik, "npars": m.npars, "mBIC": m.mbic(psi0)} for m in models]
    df = pd.DataFrame(rows, columns=COMPARISON_COLUMNS)
    df["rank"] = df["mBIC"].rank(method="first").astype(int)
    df["best"] = df["rank"] == 1
    return df.sort_values("rank", kind="stable").reset_index(drop=True)


def format_comparison_row(model, year, nobs, loglik, npars, mbic_value, sep=","):
    """One comparison row with two-decimal logLik and mBIC."""
    return sep.join([str(model), str(year), str(int(nobs)), f"{loglik:.2f}", str(int(npars)), f"{mbic_value:.2f}"])


def family_census(model: VineModel, tree=1):
    """Count of selected families (label with rotation) in one tree."""
    if not 1 <= tree <= len(model.structure.trees):
        raise ValueError(f"tree must be in 1..{len(model.structure.trees)}")
    counts = {}
    for e in model.structure.trees[tree - 1]:
        pc = model.copulas[e]
        key = pc.family
        counts[key] = counts.get(key, 0) + 1
    return {fid.label: counts[fid] for fid in sorted(counts, key=lambda f: f.sort_key)}
