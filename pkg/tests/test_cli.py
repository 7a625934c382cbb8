import pytest

from citerank import errors
from citerank.cli import main, read_manifest

from conftest import write_g0


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def stats_lines(out):
    return dict(line.split("=", 1) for line in out.splitlines())


class TestRank:
    def test_srcr_top_is_a(self, g0_files, tmp_path, capsys):
        papers, refs = g0_files
        sub = tmp_path / "sub.tsv"
        code, out, _ = run(capsys, "rank", "--papers", papers, "--references", refs, "--metric", "srcr", "--alpha", 1, "--out", sub)
        assert code == 0
        lines = sub.read_text().splitlines()
        assert lines[0] == "A\t1.00000000"
        assert [l.split("\t")[0] for l in lines] == ["A", "D", "E", "C", "B"]

    def test_citations_top_prob_one(self, g0_files, tmp_path, capsys):
        papers, refs = g0_files
        sub = tmp_path / "sub.tsv"
        assert run(capsys, "rank", "--papers", papers, "--references", refs, "--metric", "citations", "--out", sub)[0] == 0
        assert sub.read_text().splitlines()[0] == "A\t1.00000000"

    def test_missing_papers_file(self, g0_files, tmp_path, capsys):
        _, refs = g0_files
        code, _, err = run(capsys, "rank", "--papers", tmp_path / "nope.tsv", "--references", refs, "--out", tmp_path / "s")
        assert code == errors.IngestError.exit_code
        assert "nope.tsv" in err

    def test_manifest_written(self, g0_files, tmp_path, capsys):
        papers, refs = g0_files
        sub = tmp_path / "sub.tsv"
        run(capsys, "rank", "--papers", papers, "--references", refs, "--metric", "pagerank", "--out", sub)
        man = read_manifest(str(sub) + ".manifest")
        assert man["subcommand"] == "rank"
        assert man["metric"] == "pagerank"
        assert man["as_of_year"] == "2014"
        assert man["converged"] == "True"
        for stage in ("ingest", "metric", "normalize", "rank", "write", "total"):
            assert float(man[f"time.{stage}"]) >= 0

    def test_rerun_from_manifest(self, g0_files, tmp_path, capsys):
        papers, refs = g0_files
        first = tmp_path / "first.tsv"
        run(capsys, "rank", "--papers", papers, "--references", refs, "--metric", "srcr", "--alpha", 0.25, "--mode", "streaming", "--out", first)
        second = tmp_path / "second.tsv"
        assert run(capsys, "rank", "--from-manifest", str(first) + ".manifest", "--out", second)[0] == 0
        assert first.read_bytes() == second.read_bytes()
        assert read_manifest(str(second) + ".manifest")["alpha"] == "0.25"

    def test_scores_out(self, g0_files, tmp_path, capsys):
        papers, refs = g0_files
        scores = tmp_path / "scores.tsv"
        run(capsys, "rank", "--papers", papers, "--references", refs, "--metric", "acr", "--out", tmp_path / "s", "--scores-out", scores)
        assert scores.read_text().splitlines()[:2] == ["# metric=acr params=as_of_year=2014", "A\t0.4"]

    def test_alpha_zero_is_metric_error(self, g0_files, tmp_path, capsys):
        papers, refs = g0_files
        code, _, err = run(capsys, "rank", "--papers", papers, "--references", refs, "--alpha", 0, "--out", tmp_path / "s")
        assert code == errors.MetricError.exit_code
        assert "positive alpha" in err

    def test_budget_is_cocitation_error(self, g0_files, tmp_path, capsys):
        papers, refs = g0_files
        code, _, _ = run(capsys, "rank", "--papers", papers, "--references", refs, "--memory-budget", 1e-9, "--out", tmp_path / "s")
        assert code == errors.CocitationError.exit_code


class TestEval:
    def judgments(self, tmp_path, pairs):
        path = tmp_path / "j.tsv"
        path.write_text("".join(f"{a}\t{b}\n" for a, b in pairs))
        return path

    def submission(self, tmp_path, order):
        path = tmp_path / "sub.tsv"
        n = len(order)
        path.write_text("".join(f"{t}\t{(n - i) / n}\n" for i, t in enumerate(order)))
        return path

    def test_perfect(self, tmp_path, capsys):
        j = self.judgments(tmp_path, [("a", "b"), ("b", "c"), ("a", "c")])
        code, out, _ = run(capsys, "eval", "--submission", self.submission(tmp_path, "abc"), "--judgments", j)
        assert code == 0
        assert out.strip() == "agreement=1.0 agree=3 disagree=0 tie=0 missing=0"

    def test_reversed(self, tmp_path, capsys):
        j = self.judgments(tmp_path, [("a", "b"), ("b", "c"), ("a", "c")])
        _, out, _ = run(capsys, "eval", "--submission", self.submission(tmp_path, "cba"), "--judgments", j)
        assert out.startswith("agreement=0.0 ")

    def test_g0_srcr(self, g0_files, tmp_path, capsys):
        papers, refs = g0_files
        sub = tmp_path / "srcr.tsv"
        run(capsys, "rank", "--papers", papers, "--references", refs, "--metric", "srcr", "--out", sub)
        csv = tmp_path / "r.csv"
        _, out, _ = run(capsys, "eval", "--submission", sub, "--judgments", self.judgments(tmp_path, [("A", "B"), ("A", "D")]), "--csv", csv)
        assert out.startswith("agreement=1.0 ")
        assert csv.read_text().splitlines()[1] == "1.0,2,0,0,0"

    def test_empty_judgments(self, tmp_path, capsys):
        code, _, _ = run(capsys, "eval", "--submission", self.submission(tmp_path, "ab"), "--judgments", self.judgments(tmp_path, []))
        assert code == errors.EvalError.exit_code


class TestStats:
    def test_g0(self, g0_files, tmp_path, capsys):
        papers, refs = g0_files
        hist = tmp_path / "h.csv"
        code, out, _ = run(capsys, "stats", "--papers", papers, "--references", refs, "--histogram", hist)
        assert code == 0
        s = stats_lines(out)
        # D and E cite papers, so every G0 paper has citation information
        assert (s["papers_total"], s["papers_with_citation_info"], s["papers_without_citation_info"]) == ("5", "5", "0")
        assert float(s["average_neighborhood_size"]) == pytest.approx(0.8)
        assert s["papers_cited"] == "3"
        assert float(s["average_neighborhood_size_cited"]) == pytest.approx(4 / 3)
        assert hist.read_text().splitlines()[0] == "bucket_lo,bucket_hi,count"
        assert (tmp_path / "h.csv.manifest").exists()

    def test_no_edges(self, tmp_path, capsys):
        papers = tmp_path / "p.tsv"
        papers.write_text("a\t2000\nb\t2001\n")
        refs = tmp_path / "r.tsv"
        refs.write_text("")
        _, out, _ = run(capsys, "stats", "--papers", papers, "--references", refs)
        s = stats_lines(out)
        assert s["papers_without_citation_info"] == s["papers_total"] == "2"


class TestGenAndValidate:
    def test_gen_then_validate(self, tmp_path, capsys):
        d = tmp_path / "syn"
        code, _, _ = run(capsys, "gen", "--out-dir", d, "--paper-count", 2000, "--seed", 3, "--judgments", 50)
        assert code == 0
        for name in ("papers.tsv", "references.tsv", "planted_rank.txt", "judgments.tsv", "gen.manifest"):
            assert (d / name).exists()
        assert len((d / "judgments.tsv").read_text().splitlines()) == 50
        code, out, _ = run(capsys, "validate", "--papers", d / "papers.tsv", "--references", d / "references.tsv")
        assert code == 0
        assert out.startswith("papers=2000 ")
        assert "duplicate_edges=0 self_loops=0 unknown_id_edges=0" in out

    def test_gen_infeasible(self, tmp_path, capsys):
        code, _, err = run(capsys, "gen", "--out-dir", tmp_path, "--paper-count", 5, "--zero-info-fraction", 0)
        assert code == errors.SynthError.exit_code
        assert "exceeds" in err

    def test_validate_reports_dirt(self, tmp_path, capsys):
        papers = tmp_path / "p.tsv"
        papers.write_text("A\t2010\nB\t2011\nA\t2012\nbad\n")
        refs = tmp_path / "r.tsv"
        refs.write_text("B\tA\nB\tA\nB\tB\nB\tZ\n")
        _, out, _ = run(capsys, "validate", "--papers", papers, "--references", refs)
        assert out.strip() == (
            "papers=2 edges=1 duplicate_papers=1 malformed_papers=1 out_of_range_years=0 "
            "malformed_references=0 duplicate_edges=1 self_loops=1 unknown_id_edges=1"
        )


def test_exit_codes_distinct():
    classes = [errors.IngestError, errors.CocitationError, errors.MetricError, errors.RankingError, errors.EvalError, errors.SynthError]
    codes = [c.exit_code for c in classes]
    assert len(set(codes)) == len(codes)
    assert 0 not in codes and 2 not in codes  # 2 is argparse usage
