import json

import pytest
from hypothesis import given, strategies as st

from twinsmooth import jobs
from twinsmooth.arith import primes_up_to
from twinsmooth.cli import parse_cap, parse_int, run, verify_record
from twinsmooth.search import make_record


def ms_of(path):
    return [int(d["m"]) for d in jobs.read_lines(path)]


@pytest.mark.parametrize("lo,hi,i,n,want", [(1, 100, 0, 4, (1, 25)), (1, 100, 3, 4, (76, 100)),
                                            (1, 7, 0, 3, (1, 3)), (1, 7, 1, 3, (4, 5)),
                                            (1, 7, 2, 3, (6, 7)), (1, 2, 2, 3, (3, 2))])
def test_partition_examples(lo, hi, i, n, want):
    assert jobs.partition(lo, hi, i, n) == want


@given(st.integers(-50, 50), st.integers(0, 500), st.integers(1, 40))
def test_partition_covers(lo, size, n):
    hi = lo + size - 1
    parts = [jobs.partition(lo, hi, i, n) for i in range(n)]
    covered = [v for a, b in parts for v in range(a, b + 1)]
    assert covered == list(range(lo, hi + 1))
    lengths = [b - a + 1 for a, b in parts]
    assert max(lengths) - min(lengths) <= 1


@pytest.mark.parametrize("text", ["4/4", "-1/3", "1/0", "x", "1/2/3"])
def test_bad_shard(text):
    with pytest.raises(ValueError):
        jobs.parse_shard(text)


def test_parse_numbers():
    assert parse_int("2^10") == parse_int("2**10") == parse_int("1_024") == 1024
    assert parse_cap("inf") is None and parse_cap("2^258") == 2**258


def test_record_roundtrip():
    rec = make_record(4374, primes_up_to(7), "sieve")
    d = json.loads(jobs.record_to_line(rec, "2026-01-01T00:00:00Z"))
    assert list(d) == ["m", "bits", "smoothness", "delta", "x", "y", "n", "m_factors",
                       "m1_factors", "sum_prime", "strategy", "under_range", "timestamp"]
    assert d["m"] == "4374" and d["m_factors"] == [[2, 1], [3, 7]]
    assert jobs.record_from_dict(d) == rec


def test_solve_pell_output(capsys):
    assert run(["solve-pell", "--d", "7", "--cap", "1000"]) == 0
    assert capsys.readouterr().out.strip() == "x=8 y=3"
    run(["solve-pell", "--d", "61", "--cap", "10^6"])
    assert capsys.readouterr().out.startswith("ExceedsCap")
    run(["solve-pell", "--d", "49"])
    assert capsys.readouterr().out.startswith("NotApplicable")


def test_enumerate_b5(tmp_path):
    out = tmp_path / "e.jsonl"
    assert run(["enumerate", "--b", "5", "--out", str(out)]) == 0
    ms = ms_of(out)
    assert len(ms) == 10 and 80 in ms


def test_usage_errors(tmp_path):
    for argv in (["enumerate"], ["enumerate", "--b", "x"], ["search-delta", "--b", "7"],
                 ["enumerate", "--b", "5", "--shard", "3/3"], ["enumerate", "--b", "1"],
                 ["sieve-twins", "--b", "7", "--lo", "9", "--hi", "3"],
                 ["enumerate", "--b", "5", "--resume"]):
        with pytest.raises(SystemExit) as exc:
            run(argv)
        assert exc.value.code == 2, argv


def test_io_error(tmp_path):
    assert run(["verify", str(tmp_path / "missing.jsonl")]) == 1
    assert run(["enumerate", "--b", "5", "--out", str(tmp_path / "no" / "dir.jsonl")]) == 1


def test_zero_findings_is_success(tmp_path):
    out = tmp_path / "z.jsonl"
    assert run(["sieve-twins", "--b", "7", "--lo", "4376", "--hi", "5000", "--out", str(out)]) == 0
    assert ms_of(out) == []


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# high order\nb = 7\nbits_max = 16\nout = %s\n" % (tmp_path / "a.jsonl"))
    assert run(["search-high-order", "--config", str(cfg)]) == 0
    assert run(["search-high-order", "--config", str(cfg), "--bits-max", "12",
                "--out", str(tmp_path / "b.jsonl")]) == 0
    a, b = ms_of(tmp_path / "a.jsonl"), ms_of(tmp_path / "b.jsonl")
    assert max(a) > 2**12 and max(b) <= 2**12 and set(b) <= set(a)
    cfg.write_text("bogus = 1\n")
    with pytest.raises(SystemExit):
        run(["search-high-order", "--config", str(cfg), "--b", "7"])


def test_shards_union_equals_unsharded(tmp_path):
    base = ["search-delta", "--b", "13", "--delta-max", "30030", "--bits-max", "40"]
    whole = tmp_path / "whole.jsonl"
    run(base + ["--out", str(whole)])
    union = set()
    for i in range(3):
        part = tmp_path / f"s{i}.jsonl"
        run(base + ["--shard", f"{i}/3", "--out", str(part)])
        union |= set(ms_of(part))
    assert union == set(ms_of(whole)) and len(union) == 68


def test_resume_skips_done_items(tmp_path):
    out, ckpt = tmp_path / "r.jsonl", tmp_path / "r.ckpt"
    argv = ["sieve-twins", "--b", "13", "--hi", "200000", "--segment", "1000",
            "--out", str(out), "--checkpoint", str(ckpt)]
    assert run(argv) == 0
    state = json.loads(ckpt.read_text())
    assert state["finished"] and state["items_done"] == 200 and state["cursor"] == 200000
    # rewind the checkpoint to item 50 and append junk past its offset
    lines = out.read_text().splitlines(keepends=True)
    keep = [ln for ln in lines if int(json.loads(ln)["m"]) <= 50000]
    offset = sum(len(ln.encode()) for ln in keep)
    state.update(items_done=50, cursor=50000, out_offset=offset, finished=False)
    ckpt.write_text(json.dumps(state))
    with open(out, "a") as f:
        f.write(lines[-1][:20])
    assert run(argv + ["--resume"]) == 0
    assert ms_of(out) == [int(json.loads(ln)["m"]) for ln in lines]


def test_resume_rejects_other_config(tmp_path):
    out, ckpt = tmp_path / "r.jsonl", tmp_path / "r.ckpt"
    run(["sieve-twins", "--b", "7", "--hi", "100", "--out", str(out), "--checkpoint", str(ckpt)])
    with pytest.raises(SystemExit) as exc:
        run(["sieve-twins", "--b", "11", "--hi", "100", "--out", str(out),
             "--checkpoint", str(ckpt), "--resume"])
    assert exc.value.code == 2


def test_chm_subcommand(tmp_path):
    out = tmp_path / "c.jsonl"
    assert run(["chm", "--b", "7", "--out", str(out)]) == 0
    ms = ms_of(out)
    assert ms[:6] == [1, 2, 3, 4, 5, 6] and len(set(ms)) == len(ms)
    with pytest.raises(SystemExit):
        run(["chm", "--b", "7", "--seeds", "1,10"])


def test_lift_subcommand(tmp_path):
    out = tmp_path / "l.jsonl"
    assert run(["lift", "--b", "7", "--m", "1", "--m", "4", "--bits-max", "64", "--out", str(out)]) == 0
    assert sorted(ms_of(out)) == [8, 49, 80]


def test_verify_accepts_own_output(tmp_path, capsys):
    paths = []
    for i, argv in enumerate([["sieve-twins", "--b", "13", "--hi", "10^5"],
                              ["search-high-order", "--b", "7", "--bits-max", "16"],
                              ["search-delta", "--b", "31", "--delta-max", "10^4", "--bits-max", "64"],
                              ["search-small-primes", "--b", "31", "--k", "3", "--delta-lo", "100",
                               "--delta-hi", "5000", "--bits-max", "64"],
                              ["lift", "--b", "13", "--m", "4", "--m", "1"],
                              ["chm", "--b", "7", "--rounds", "3"],
                              ["enumerate", "--b", "7"]]):
        paths.append(str(tmp_path / f"o{i}.jsonl"))
        assert run(argv + ["--out", paths[-1]]) == 0
    capsys.readouterr()
    assert run(["verify", *paths]) == 0
    reports = [json.loads(ln) for ln in capsys.readouterr().out.splitlines()]
    assert reports and all(r["ok"] for r in reports)


def test_verify_rejects_tampering():
    d = json.loads(jobs.record_to_line(make_record(80, primes_up_to(5), "sieve")))
    assert verify_record(d)["ok"]
    assert not verify_record({**d, "n": 1})["ok"]
    assert not verify_record({**d, "sum_prime": True})["ok"]
    assert not verify_record({**d, "m": "81"})["ok"]
    assert not verify_record({**d, "m1_factors": [[3, 3]]})["ok"]


def test_verify_bare_m_uses_default_bound(tmp_path, capsys):
    path = tmp_path / "m.jsonl"
    path.write_text('{"m": "51963397732665557125190357543988479960188331933248699616266017360"}\n')
    assert run(["verify", str(path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ok"] and rep["bound"] == 1 << 20
    assert rep["smoothness"] == 19949 and rep["bits"] == 215 and rep["n"] == 2


def test_chm_resume_replays_rounds(tmp_path):
    out, ckpt, head = tmp_path / "c.jsonl", tmp_path / "c.ckpt", tmp_path / "h.jsonl"
    assert run(["chm", "--b", "13", "--rounds", "4", "--out", str(out), "--checkpoint", str(ckpt)]) == 0
    full = ms_of(out)
    # the first two items (seeds and round 1) take as many bytes as a 1-round run
    run(["chm", "--b", "13", "--rounds", "1", "--out", str(head)])
    state = json.loads(ckpt.read_text())
    state.update(items_done=2, cursor=1, out_offset=head.stat().st_size, finished=False)
    ckpt.write_text(json.dumps(state))
    assert run(["chm", "--b", "13", "--rounds", "4", "--out", str(out), "--checkpoint", str(ckpt),
                "--resume"]) == 0
    assert ms_of(out) == full
