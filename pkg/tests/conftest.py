"""Shared fixtures: canonical code strings, registries, scripted backends."""

import json
import pathlib

import pytest

from nlbeam.backends import Rule, scripted_backend
from nlbeam.registry import FunctionEntry, Registry, load_registry

DATA_DIR = pathlib.Path(__file__).parent / "data"
PACKAGE_REGISTRY = (
    pathlib.Path(__file__).parent.parent
    / "src"
    / "nlbeam"
    / "data"
    / "registries"
    / "cms.json"
)

# Three published implementations of the same incident-angle sweep, plus a
# second reference using positional exposure-time style.  All four execute
# to identical instrument traces; they differ only in naming and spacing.
SWEEP_REFERENCE_1 = (
    "for angle in np.arange(0.05, 1.5 + 0.02, 0.02):\n"
    "    sam.thabs(angle)\n"
    "    sam.measure(exposure_time=0.5)"
)
SWEEP_CANDIDATE_QWEN = (
    "for theta in np.arange(0.05, 1.5 + 0.02, 0.02):\n"
    "    sam.thabs(theta)\n"
    "    sam.measure(exposure_time=0.5)"
)
SWEEP_CANDIDATE_MISTRAL = (
    "for th in np.arange(0.05, 1.5+0.02, 0.02):\n"
    "    sam.thabs(th)\n"
    "    sam.measure(exposure_time=0.5)"
)
SWEEP_REFERENCE_2 = (
    "for th in np.arange(0.05, 1.5+0.02, 0.02):\n"
    "    sam.thabs(th)\n"
    "    sam.measure(0.5)"
)

# Timed acquisition loop: one 1-second measurement every 10 seconds for a
# minute, written in the wall-clock style the code generators produce.
TIMED_LOOP = (
    "import time\n"
    "\n"
    "start_time = time.time()\n"
    "end_time = start_time + 60\n"
    "\n"
    "while time.time() < end_time:\n"
    "    loop_start = time.time()\n"
    "    sam.measure(1)\n"
    "    elapsed = time.time() - loop_start\n"
    "    if elapsed < 10:\n"
    "        time.sleep(10 - elapsed)"
)


@pytest.fixture(scope="session")
def cms_registry():
    return load_registry(PACKAGE_REGISTRY)


@pytest.fixture(scope="session")
def classifier_golden():
    return (DATA_DIR / "classifier_prompt_golden.txt").read_text()


@pytest.fixture(scope="session")
def operator_golden():
    return (DATA_DIR / "operator_prompt_golden.txt").read_text()


@pytest.fixture(scope="session")
def op_registry(cms_registry):
    """Two-function registry matching the operator prompt golden file."""
    return Registry(
        entries=(
            FunctionEntry(
                id="wsam",
                input_phrase="check the sample motors",
                output_code="wsam()",
                command_class="Op",
            ),
            FunctionEntry(
                id="detselect-waxs",
                input_phrase="Select the waxs detector",
                output_code="detselect(pilatus800)",
                command_class="Op",
            ),
        ),
        base_prompts=dict(cms_registry.base_prompts),
        version=0,
    )


@pytest.fixture
def measure_backends():
    """Deterministic classifier/operator pair for the measure-5-seconds flow."""
    return {
        "classifier": scripted_backend(
            [
                Rule("Measure sample for 5 seconds.", "Op"),
                Rule("Where is the peak?", "Ana"),
                Rule("note", "Notebook", mode="substring"),
            ]
        ),
        "operator": scripted_backend(
            [Rule("Measure sample for 5 seconds.", "sam.measure(5)")]
        ),
        "analyst": scripted_backend(
            [Rule("Where is the peak?", "circular_average_q2I_fit")]
        ),
    }


@pytest.fixture
def registry_file(tmp_path, cms_registry):
    """Writable copy of the instrument registry for commit tests."""
    path = tmp_path / "registry.json"
    path.write_text(PACKAGE_REGISTRY.read_text())
    return path


@pytest.fixture
def gateway_config(registry_file, tmp_path, measure_backends):
    from nlbeam.gateway import GatewayConfig

    return GatewayConfig(
        registry_path=str(registry_file),
        db_path=str(tmp_path / "log.db"),
        backends=dict(measure_backends),
        notebook_dir=str(tmp_path),
    )


def write_corpus(directory):
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "detectors.txt").write_text(
        "The hybrid pixel detector has 172 micron pixels.\n"
        "\n"
        "Wide-angle scattering probes molecular packing distances.\n"
    )
    (directory / "alignment.txt").write_text(
        "Sample alignment zeroes the incident angle against the beam.\n"
    )
    return directory
