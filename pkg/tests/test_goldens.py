import pytest

from parity import golden_bytes, load_manifest, make_client, run_cli_case, run_http_case

MANIFEST = load_manifest()


@pytest.fixture(scope="module")
def client():
    return make_client(MANIFEST)


@pytest.mark.parametrize(
    "case", MANIFEST["cases"], ids=[c["name"] for c in MANIFEST["cases"]]
)
def test_both_surfaces_match_the_frozen_payload(case, client, tmp_path):
    frozen = golden_bytes(case)
    assert run_cli_case(case, tmp_path) == frozen
    assert run_http_case(case, client) == frozen
