import itertools

import numpy as np
import pytest

from citerank.ingest import EdgeList, PaperTable, build_graph

G0_PAPERS = [("A", 2010), ("B", 2011), ("C", 2012), ("D", 2013), ("E", 2014)]
G0_EDGES = [("D", "A"), ("D", "B"), ("E", "A"), ("E", "C")]


def write_g0(directory):
    papers = directory / "papers.tsv"
    refs = directory / "references.tsv"
    papers.write_text("".join(f"{p}\t{y}\n" for p, y in G0_PAPERS))
    refs.write_text("".join(f"{c}\t{d}\n" for c, d in G0_EDGES))
    return papers, refs


@pytest.fixture
def g0():
    return build_graph(PaperTable.from_records(G0_PAPERS), EdgeList(G0_EDGES))


@pytest.fixture
def g0_files(tmp_path):
    return write_g0(tmp_path)


def random_graph(seed, n_papers, n_edges, year_lo=2000, year_hi=2015):
    """Random paper table and (possibly dirty) edge list, built from tokens."""
    rng = np.random.default_rng(seed)
    ids = [f"p{i:05d}" for i in range(n_papers)]
    years = rng.integers(year_lo, year_hi + 1, size=n_papers).tolist()
    src = rng.integers(0, n_papers, size=n_edges).tolist()
    dst = rng.integers(0, n_papers, size=n_edges).tolist()
    table = PaperTable.from_records(zip(ids, years))
    return build_graph(table, EdgeList([(ids[s], ids[d]) for s, d in zip(src, dst)]))


# --- independent oracles -------------------------------------------------


def reference_lists(graph):
    """citing token -> set of cited tokens, via the token edge list."""
    refs = {}
    for c, d in graph.edge_tokens():
        refs.setdefault(c, set()).add(d)
    return refs


def brute_force_neighbors(graph):
    """N_p by testing every pair (p, q) for a common citing paper."""
    refs = reference_lists(graph)
    lists = list(refs.values())
    out = {}
    for p, q in itertools.permutations(graph.ids, 2):
        if any(p in r and q in r for r in lists):
            out.setdefault(p, set()).add(q)
    return {p: out.get(p, set()) for p in graph.ids}


def recount_in_degree(graph):
    counts = dict.fromkeys(graph.ids, 0)
    for _, d in set(graph.edge_tokens()):
        counts[d] += 1
    return counts


def dense_pagerank(graph, damping, tol=1e-14, max_iter=10_000):
    """Power iteration on the explicit n x n Google matrix."""
    n = graph.paper_count
    G = np.zeros((n, n))
    for c in range(n):
        refs = graph.references(c)
        if len(refs):
            for d in refs:
                G[d, c] = 1.0 / len(refs)
        else:
            G[:, c] = 1.0 / n
    G = damping * G + (1 - damping) / n
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = G @ x
        if np.abs(nxt - x).sum() < tol:
            return nxt
        x = nxt
    return x


# --- acceptance reporting --------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and not report.failed):
        return
    label = marker.args[0]
    ok = report.passed if report.when == "call" else False
    # a criterion spanning several tests passes only if all of them pass
    _CRITERIA[label] = _CRITERIA.get(label, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in _CRITERIA.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
