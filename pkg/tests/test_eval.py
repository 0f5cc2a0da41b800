import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from nltk.translate.bleu_score import SmoothingFunction, sentence_bleu
from nltk.translate.meteor_score import single_meteor_score
from rouge_score import rouge_scorer
from scipy import special, stats

from ecgkit.eval import (
    ScoreTable,
    accuracy,
    betainc,
    bleu4,
    count_significant_wins,
    fetch_external_scores,
    meteor_simplified,
    normalize_radar,
    paired_ttest,
    radar_csv,
    read_external_scores,
    rouge_l,
    score_pairs,
    t_cdf,
    tokenize,
)
from ecgkit.exceptions import FewerThanTwoModels, FormatError, InvalidScoreTable, ValidationError

from fixtures import REPORTED_BLEU_COLUMN, metric_pairs
from oracles import brute_force_wins


class _NoSynonyms:
    def synsets(self, word):
        return []


class _Split:
    def tokenize(self, text):
        return text.split()


_ROUGE = rouge_scorer.RougeScorer(["rougeL"], tokenizer=_Split())


def nltk_bleu(c, r):
    return 100 * sentence_bleu([r], c, smoothing_function=SmoothingFunction(epsilon=1e-9).method1)


# ---------------------------------------------------------------- metrics


def test_tokenize():
    assert tokenize("Sinus Rhythm, rate=70.") == ["sinus", "rhythm", ",", "rate", "=", "70", "."]


def test_bleu_examples():
    assert bleu4("the cat sat on the mat", "the cat sat on the mat") == pytest.approx(100)
    assert bleu4("a b c", "x y z") == 0.0
    assert bleu4("", "x y z") == 0.0
    c, r = tokenize("the cat sat on the mat"), tokenize("the cat is on the mat")
    assert bleu4(c, r) == pytest.approx(nltk_bleu(c, r), abs=1e-6)


def test_rouge_examples():
    assert rouge_l("a b c d", "a c d e") == pytest.approx(75.0)
    assert rouge_l("a b", "a b") == 100.0
    assert rouge_l("a b", "c d") == 0.0


def test_meteor_examples():
    for m in (1, 4, 10, 25):
        s = " ".join(f"w{i}" for i in range(m))
        assert meteor_simplified(s, s) == pytest.approx(100 * (1 - 0.5 / m ** 3))
    assert meteor_simplified("a b", "c d") == 0.0
    # stem stage links inflections
    assert meteor_simplified("beats showing", "beat shows") > 0
    assert meteor_simplified("beats showing", "beat shows", stem=False) == 0


def test_accuracy():
    assert accuracy(["a", "b"], ["a", "b"]) == 1.0
    assert accuracy(["a", "b"], ["c", "d"]) == 0.0
    assert accuracy(list("abcde"), ["a", "b", "c", "x", "y"]) == 0.6
    assert accuracy(["yes  \n"], ["yes"]) == 1.0


def test_metrics_match_oracles_on_fixture():
    for cand, ref in metric_pairs():
        c, r = tokenize(cand), tokenize(ref)
        assert bleu4(c, r) == pytest.approx(nltk_bleu(c, r), abs=1e-6)
        assert rouge_l(c, r) == pytest.approx(
            100 * _ROUGE.score(" ".join(r), " ".join(c))["rougeL"].fmeasure, abs=1e-6)
        assert meteor_simplified(c, r) == pytest.approx(
            100 * single_meteor_score(r, c, wordnet=_NoSynonyms()), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=20),
       st.lists(st.sampled_from("abcdef"), min_size=1, max_size=20))
def test_metric_bounds_and_oracles(c, r):
    for fn in (bleu4, rouge_l, meteor_simplified):
        assert 0.0 <= fn(c, r) <= 100.0 + 1e-9
    assert bleu4(c, r) == pytest.approx(nltk_bleu(c, r), abs=1e-6)
    assert meteor_simplified(c, r) == pytest.approx(
        100 * single_meteor_score(r, c, wordnet=_NoSynonyms()), abs=1e-9)


def test_score_pairs_parallel_equals_serial():
    pairs = metric_pairs(20)
    cands, refs = [p[0] for p in pairs], [p[1] for p in pairs]
    assert score_pairs(cands, refs, n_jobs=4) == score_pairs(cands, refs)


# ---------------------------------------------------------------- statistics


def test_betainc_against_scipy():
    for a, b, x in [(0.5, 0.5, 0.3), (2, 3, 0.9), (15, 0.5, 0.99), (1e-3, 2, 0.5), (40, 40, 0.5)]:
        assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-13)


@pytest.mark.parametrize("dof", [1, 2, 5, 30])
def test_t_cdf_against_scipy(dof):
    for t in np.linspace(-10, 10, 81):
        assert abs(t_cdf(t, dof) - stats.t.cdf(t, dof)) < 1e-12


def test_paired_ttest_fixture():
    r = paired_ttest([2, 3, 4, 5, 6], [1, 1, 1, 1, 1])
    assert r.mean_diff == 3 and r.sd_diff == pytest.approx(math.sqrt(2.5))
    assert r.t == pytest.approx(4.242640687119285, abs=1e-12)
    assert r.p == pytest.approx(0.013235599563682695, abs=1e-12)
    assert r.dof == 4


def test_paired_ttest_degenerate():
    r = paired_ttest([1, 2, 3], [1, 2, 3])
    assert (r.t, r.p, r.degenerate) == (0.0, 1.0, True)
    r = paired_ttest([2, 3, 4], [1, 2, 3])
    assert r.p == 0.0 and r.degenerate and r.t == math.inf
    with pytest.raises(ValidationError):
        paired_ttest([1], [2])
    with pytest.raises(ValidationError):
        paired_ttest([1, 2], [2])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=2, max_size=10))
def test_paired_ttest_symmetry_and_oracle(pairs):
    a = [p[0] for p in pairs]
    b = [p[1] for p in pairs]
    r1, r2 = paired_ttest(a, b), paired_ttest(b, a)
    assert r1.p == r2.p and r1.t == -r2.t
    assert 0.0 <= r1.p <= 1.0
    if not r1.degenerate and r1.sd_diff > 1e-6 * max(1.0, abs(r1.mean_diff)):
        ref = stats.ttest_rel(a, b)
        assert r1.t == pytest.approx(ref.statistic, rel=1e-9, abs=1e-9)
        assert r1.p == pytest.approx(ref.pvalue, rel=1e-7, abs=1e-12)


# ---------------------------------------------------------------- score tables


def planted_table(seed=0, n_models=4, n_data=4, n_metrics=5):
    rng = np.random.default_rng(seed)
    rows = []
    for d in range(n_data):
        for k in range(n_metrics):
            base = rng.uniform(10, 50, n_models)
            if rng.random() < 0.5:
                base[rng.integers(n_models)] += rng.uniform(0, 8)
            for m in range(n_models):
                for s in range(5):
                    rows.append((f"d{d}", f"m{m}", f"k{k}", s, base[m] + rng.normal(0, 1)))
    return rows


def test_score_table_validation():
    with pytest.raises(InvalidScoreTable):
        ScoreTable([])
    with pytest.raises(InvalidScoreTable):
        ScoreTable([("d", "m", "k", 0, 1.0), ("d", "m", "k", 0, 2.0)])
    with pytest.raises(InvalidScoreTable):
        ScoreTable([("d", "m", "k", 0, float("nan"))])
    with pytest.raises(InvalidScoreTable):
        ScoreTable([("d", "a", "k", 0, 1.0), ("d", "b", "k", 1, 1.0)])


def test_score_table_csv_round_trip(tmp_path):
    t = ScoreTable(planted_table())
    t.write_csv(tmp_path / "s.csv")
    back = ScoreTable.read_csv(tmp_path / "s.csv")
    assert back.rows() == t.rows()
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(InvalidScoreTable):
        ScoreTable.read_csv(tmp_path / "bad.csv")


@pytest.mark.parametrize("seed", range(5))
def test_wins_match_brute_force(seed):
    rows = planted_table(seed)
    assert count_significant_wins(ScoreTable(rows)).wins == brute_force_wins(rows)


def test_wins_dominant_and_identical():
    rows = []
    for d in range(3):
        for k in range(4):
            for s in range(5):
                rows.append((f"d{d}", "big", f"k{k}", s, 1000 + s * 0.01))
                rows.append((f"d{d}", "small", f"k{k}", s, 1 + s * 0.02))
    assert count_significant_wins(ScoreTable(rows)).wins == {"big": 12, "small": 0}
    same = [(d, "a", k, s, v) for d, _, k, s, v in rows if _ == "big"]
    same += [(d, "b", k, s, v) for d, _, k, s, v in rows if _ == "big"]
    assert count_significant_wins(ScoreTable(same)).wins == {"a": 0, "b": 0}


def test_wins_need_two_models():
    with pytest.raises(FewerThanTwoModels):
        count_significant_wins(ScoreTable([("d", "m", "k", 0, 1.0), ("d", "m", "k", 1, 2.0)]))


def test_wins_invariant_under_affine_rescale():
    rows = planted_table(3)
    scaled = [(d, m, k, s, 3.5 * v - 7) for d, m, k, s, v in rows]
    assert count_significant_wins(ScoreTable(scaled)).wins == \
        count_significant_wins(ScoreTable(rows)).wins


def test_radar_reported_bleu_column():
    rows = [("ecg-chat-instruct", m, "bleu", 0, v) for m, v in REPORTED_BLEU_COLUMN.items()]
    pts = {p.model: p.normalized for p in normalize_radar(ScoreTable(rows))}
    assert pts["ECG-Byte"] == 1.0
    assert pts["img-ViT"] == 0.0
    assert all(0.0 <= v <= 1.0 for v in pts.values())


def test_radar_single_model_and_csv():
    pts = normalize_radar(ScoreTable([("d", "only", "k", 0, 3.0)]))
    assert pts[0].normalized == 0.5 and pts[0].constant
    assert radar_csv(pts) == "dataset,metric,model,normalized\nd,k,only,0.5\n"


# ---------------------------------------------------------------- external scorer


def test_external_scores_file(tmp_path):
    p = tmp_path / "b.jsonl"
    p.write_text('{"score": 0.5}\n{"score": 0.75}\n')
    assert read_external_scores(p, expected=2) == [0.5, 0.75]
    with pytest.raises(FormatError):
        read_external_scores(p, expected=3)
    p.write_text('{"nope": 1}\n')
    with pytest.raises(FormatError):
        read_external_scores(p)


def test_external_scores_http():
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            body = self.rfile.read(int(self.headers["Content-Length"])).decode()
            reqs = [json.loads(line) for line in body.splitlines()]
            out = "".join(json.dumps({"score": float(r["candidate"] == r["reference"])}) + "\n"
                          for r in reqs)
            self.send_response(200)
            self.end_headers()
            self.wfile.write(out.encode())

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        url = f"http://127.0.0.1:{server.server_port}/score"
        assert fetch_external_scores(url, ["a", "b"], ["a", "c"]) == [1.0, 0.0]
    finally:
        server.shutdown()
