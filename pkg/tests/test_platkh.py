import io
import json
from fractions import Fraction

import numpy as np
import pytest

import constants
import libkhcube as kc
import libklrw as kl
import libplat as lp
import platkh
from liblinalg import HomologyGroup
from libplat import Calibration, KhTable

IDENTITY = Calibration(1, Fraction(0), 1, 1)


def parse(*argv):
    return platkh.build_parser().parse_args(list(argv))


def test_parser_defaults():
    args = parse()
    assert args.command == "run"
    assert args.pairs == 1
    assert args.word == ""
    assert args.format == constants.PLATKH["default_format"]
    assert args.threads is None


def test_config_from_args():
    args = parse("-n", "2", "-w", "s2 s2 s2", "-f", "json", "--threads", "3", "--cache", "")
    config = platkh.config_from_args(args, environ={})
    assert config == platkh.RunConfig(
        n_pairs=2, word="s2 s2 s2", fmt="json", threads=3, cache=None
    )


def test_threads_flag_beats_the_environment():
    args = parse("--threads", "3")
    assert platkh.config_from_args(args, environ={"PLATKH_THREADS": "5"}).threads == 3


def test_threads_from_the_environment():
    args = parse()
    assert platkh.config_from_args(args, environ={"PLATKH_THREADS": "5"}).threads == 5
    default = constants.PLATKH["threads"]
    assert platkh.config_from_args(args, environ={"PLATKH_THREADS": "many"}).threads == default
    assert platkh.config_from_args(args, environ={}).threads == default


@pytest.mark.parametrize(
    "options",
    [{"fmt": "xml"}, {"threads": 0}, {"budget_terms": 0}],
)
def test_run_config_validation(options):
    with pytest.raises(ValueError):
        platkh.RunConfig(n_pairs=1, **options)


def test_run_reports_parse_errors():
    out, err = io.StringIO(), io.StringIO()
    code = platkh.run(platkh.RunConfig(n_pairs=2, word="s9"), out, err)
    assert code == constants.EXIT["parse"]
    assert "valid range is 1..3" in err.getvalue()
    assert out.getvalue() == ""


def _trefoil(word, calibration, **options):
    groups = {(0, 1): HomologyGroup(1, ()), (3, 7): HomologyGroup(0, (2,))}
    return KhTable(word.n_pairs, word.text(), groups, True, calibration)


@pytest.fixture
def calibrated(monkeypatch):
    monkeypatch.setattr(platkh, "obtain_calibration", lambda cache: IDENTITY)


def test_run_writes_json(calibrated, monkeypatch):
    monkeypatch.setattr(lp, "compute", _trefoil)
    out = io.StringIO()
    config = platkh.RunConfig(n_pairs=2, word="s2 s2 s2", fmt="json")
    assert platkh.run(config, out, io.StringIO()) == constants.EXIT["ok"]
    data = json.loads(out.getvalue())
    assert data["word"] == "s2 s2 s2"
    assert data["groups"][1]["torsion"] == [2]
    assert out.getvalue().endswith("\n")


def test_run_writes_a_table(calibrated, monkeypatch):
    monkeypatch.setattr(lp, "compute", _trefoil)
    out = io.StringIO()
    assert platkh.run(platkh.RunConfig(n_pairs=2, word="s2"), out, io.StringIO()) == 0
    assert "Z/2" in out.getvalue()
    assert "jones: q" in out.getvalue()


def test_run_resource_abort(calibrated, monkeypatch):
    record = {"step": 1, "twist": "s2", "terms": 99, "entries": 7, "ms": 1.0}

    def abort(word, calibration, **options):
        raise lp.ResourceAbort("too big", [record])

    monkeypatch.setattr(lp, "compute", abort)
    err = io.StringIO()
    code = platkh.run(platkh.RunConfig(n_pairs=2, word="s2"), io.StringIO(), err)
    assert code == constants.EXIT["resource"]
    assert "step=1 twist=s2 terms=99 entries=7 ms=1" in err.getvalue()


def test_run_resource_abort_with_trace_prints_each_step_once(calibrated, monkeypatch):
    record = {"step": 1, "twist": "s2", "terms": 99, "entries": 7, "ms": 1.0}

    def abort(word, calibration, on_step=None, **options):
        on_step(record)
        raise lp.ResourceAbort("too big", [record])

    monkeypatch.setattr(lp, "compute", abort)
    err = io.StringIO()
    config = platkh.RunConfig(n_pairs=2, word="s2", trace=True)
    assert platkh.run(config, io.StringIO(), err) == constants.EXIT["resource"]
    assert err.getvalue().count("step=1 twist=s2") == 1


def test_run_internal_error(calibrated, monkeypatch):
    def broken(word, calibration, **options):
        raise kl.NormalFormError("no normal form")

    monkeypatch.setattr(lp, "compute", broken)
    err = io.StringIO()
    code = platkh.run(platkh.RunConfig(n_pairs=1, word="s1"), io.StringIO(), err)
    assert code == constants.EXIT["internal"]
    assert "NormalFormError" in err.getvalue()


def test_trace_lines(calibrated, monkeypatch):
    def traced(word, calibration, on_step=None, **options):
        on_step({"step": 1, "twist": "S2", "terms": 16, "entries": 32, "ms": 0.4})
        return _trefoil(word, calibration)

    monkeypatch.setattr(lp, "compute", traced)
    err = io.StringIO()
    config = platkh.RunConfig(n_pairs=2, word="s2", trace=True)
    assert platkh.run(config, io.StringIO(), err) == 0
    assert err.getvalue() == "step=1 twist=S2 terms=16 entries=32 ms=0\n"


def test_obtain_calibration_prefers_the_frozen_map(cache_dir):
    cache = platkh.open_cache(cache_dir)
    lp.save_calibration(cache, IDENTITY)
    assert platkh.obtain_calibration(cache) == Calibration.from_json(
        constants.CALIBRATION["frozen"]
    )


def test_obtain_calibration_falls_back_to_the_cache(cache_dir, monkeypatch):
    monkeypatch.setitem(constants.CALIBRATION, "frozen", None)
    cache = platkh.open_cache(cache_dir)
    with pytest.raises(lp.CalibrationError, match="selftest"):
        platkh.obtain_calibration(cache)
    lp.save_calibration(cache, IDENTITY)
    assert platkh.obtain_calibration(cache) == IDENTITY


def test_obtain_calibration_never_runs_the_cube(cache_dir, monkeypatch):
    def forbidden(*args, **kwargs):
        raise AssertionError("the cube oracle was consulted")

    monkeypatch.setattr(kc, "oracle_table", forbidden)
    monkeypatch.setattr(kc, "cube_homology", forbidden)
    platkh.obtain_calibration(platkh.open_cache(cache_dir))


def test_run_without_a_calibration_is_an_internal_error(cache_dir, monkeypatch):
    monkeypatch.setitem(constants.CALIBRATION, "frozen", None)
    err = io.StringIO()
    config = platkh.RunConfig(n_pairs=1, cache=cache_dir)
    assert platkh.run(config, io.StringIO(), err) == constants.EXIT["internal"]
    assert "CalibrationError" in err.getvalue()


def test_relation_checks():
    assert platkh.check_relations(10) == "10 contexts"
    assert platkh.check_confluence(10) == "10 words"
    assert platkh.check_algebra(5) == "5 triples"
    assert platkh.check_linalg(20) == "20 matrices"


def test_minors_give_the_invariant_factors():
    assert platkh._minors_invariants(np.array([[2, 0], [0, 3]])) == (1, 6)
    assert platkh._minors_invariants(np.array([[2, 4], [4, 8]])) == (2,)
    assert platkh._minors_invariants(np.zeros((2, 2), dtype=int)) == ()


@pytest.mark.slow
def test_template_checks():
    assert "υ₊" in platkh.check_templates()


def test_main_rejects_bad_config(monkeypatch):
    monkeypatch.delenv("PLATKH_THREADS", raising=False)
    assert platkh.main(["--threads", "0"]) == constants.EXIT["parse"]


@pytest.mark.slow
def test_selftest(cache_dir):
    out = io.StringIO()
    assert platkh.selftest(out, cache_dir) == 0
    assert "FAIL" not in out.getvalue()
