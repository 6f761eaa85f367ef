import numpy as np
import pytest

from epiphase.pipeline import PipelineConfig, run_pipeline
from epiphase.synthetic import make_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20200120)


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    """The seeded 189-day synthetic dataset, written once per session."""
    root = tmp_path_factory.mktemp("fixture")
    truth = make_dataset(root, seed=0)
    return root, truth


@pytest.fixture(scope="session")
def bundle(fixture_dir):
    """One full pipeline run on the synthetic fixture (default settings)."""
    root, truth = fixture_dir
    cfg = PipelineConfig.load(root / "pipeline.cfg", {"out": str(root / "bundle")})
    manifest = run_pipeline(cfg)
    return root / "bundle", manifest, truth


# ---------------------------------------------------------------- acceptance report

_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.module.__name__ != "test_acceptance":
        return
    done = (report.when == "call") or (report.when == "setup" and not report.passed)
    if done:
        label = (item.function.__doc__ or item.name).strip().splitlines()[0]
        detail = "; ".join(f"{k} {v}" for k, v in item.user_properties)
        status = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
        _ACCEPTANCE.append((status, label, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, label, detail in _ACCEPTANCE:
        line = f"{status}  {label}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
