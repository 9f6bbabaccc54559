import pytest

from gatedstore.sockets import run_socket_demo


@pytest.mark.parametrize("access", ["be", "te"])
def test_socket_demo_roundtrip(access):
    result = run_socket_demo(access=access, writes=1, data_size=120, timeout_s=60)
    assert len(result["writes"]) == 1
    assert result["writes"][0]["txid"]
    assert result["reads"][0]["status"] == "done"
    assert result["payload_verified"]
