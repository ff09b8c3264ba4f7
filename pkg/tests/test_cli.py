import json

import pytest

from cubelock import cli
from cubelock.config import Config, load_config, parse_config
from cubelock.errors import FormatError, ParameterError
from cubelock.puzzle import bench_primes, load_key


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def keyfile(tmp_path, capsys):
    path = tmp_path / "k.key"
    code, _, _ = run(capsys, "setup", "--T", "1", "--lambda", "700", "--seed", "1f", "--out", str(path))
    assert code == 0
    return path


# -- config ----------------------------------------------------------------------------


def test_config_defaults_and_parse():
    assert load_config({}) == Config()
    cfg = parse_config("# comment\nseed_len = 128\nreduction_strategy=barrett\n")
    assert cfg.seed_len == 128 and cfg.reduction_strategy == "barrett"


def test_config_errors():
    with pytest.raises(FormatError) as err:
        parse_config("seed_len=1\nbogus=2\n")
    assert err.value.line == 2
    with pytest.raises(ParameterError):
        parse_config("window_width=40\n")
    with pytest.raises(ParameterError):
        parse_config("reduction_strategy=naive\n")


def test_config_env(tmp_path, monkeypatch, keyfile, capsys):
    conf = tmp_path / "cfg"
    conf.write_text("seed_len=64\nwindow_width=3\n")
    monkeypatch.setenv("CUBELOCK_CONFIG", str(conf))
    ct = tmp_path / "c.ct"
    assert run(capsys, "encrypt", "--key", str(keyfile), "--message", "hi", "--out", str(ct))[0] == 0
    assert "l=64" in ct.read_text()


# -- setup / encrypt / decrypt ------------------------------------------------------------


def test_setup_key_size(keyfile):
    params = load_key(keyfile.read_text())
    assert params.n - 1 == 700


def test_setup_deterministic_under_seed(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "setup", "--T", "1", "--lambda", "300", "--seed", "abc", "--out", str(a))
    run(capsys, "setup", "--T", "1", "--lambda", "300", "--seed", "abc", "--out", str(b))
    assert a.read_text() == b.read_text()


def test_round_trip_through_files(tmp_path, keyfile, capsys):
    msg = tmp_path / "m.bin"
    msg.write_bytes(bytes(range(40)))
    ct, out = tmp_path / "c.ct", tmp_path / "out.bin"
    assert run(capsys, "encrypt", "--key", str(keyfile), "--in", str(msg), "--out", str(ct))[0] == 0
    copy = tmp_path / "copy.ct"
    copy.write_text(ct.read_text())
    code, _, err = run(capsys, "decrypt", "--key", str(keyfile), "--ct", str(copy), "--out", str(out))
    assert code == 0
    assert out.read_bytes() == msg.read_bytes()
    assert "wall=" in err and "depth=" in err


def test_encrypt_deterministic_under_seed(tmp_path, keyfile, capsys):
    outs = [run(capsys, "encrypt", "--key", str(keyfile), "--message", "x", "--seed", "7")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_message_too_long(keyfile, capsys):
    code, _, err = run(capsys, "encrypt", "--key", str(keyfile), "--message", "x" * 200)
    assert code == 4 and "does not fit" in err


def test_message_cap(tmp_path, capsys):
    key = tmp_path / "big.key"
    key.write_text(
        f"cubelock-key v1\np={bench_primes()[4096]:x}\nb={(1 + 2 * (bench_primes()[4096] - 1)) // 3:x}\nT=1\nlambda=4095\n"
    )
    big = tmp_path / "big.bin"
    big.write_bytes(b"\0" * ((1 << 20) + 1))
    code, _, err = run(capsys, "encrypt", "--key", str(key), "--in", str(big))
    assert code == 4 and "1 MiB" in err


def test_wrong_key(tmp_path, keyfile, capsys):
    other = tmp_path / "other.key"
    run(capsys, "setup", "--T", "1", "--lambda", "650", "--seed", "2", "--out", str(other))
    ct = tmp_path / "c.ct"
    run(capsys, "encrypt", "--key", str(keyfile), "--message", "m", "--out", str(ct))
    code, _, err = run(capsys, "decrypt", "--key", str(other), "--ct", str(ct))
    assert code == 3 and "wrong key" in err


def test_bad_file_reports_line(tmp_path, keyfile, capsys):
    ct = tmp_path / "c.ct"
    ct.write_text("cubelock-ct v1\nfp=" + "0" * 32 + "\nl=zz\nchain=none\nc=5\n")
    code, _, err = run(capsys, "decrypt", "--key", str(keyfile), "--ct", str(ct))
    assert code == 3 and "line 3" in err


def test_parameter_error_exit(capsys):
    assert run(capsys, "setup", "--T", "1", "--lambda", "5")[0] == 4


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 2
    assert run(capsys, "calibrate", "--duration", "0")[0] == 2
    assert run(capsys, "setup", "--T", "1", "--lambda", "100", "--seed", "xyz")[0] == 2


# -- chain -------------------------------------------------------------------------------------


def test_chain_build_encrypt_decrypt(tmp_path, keyfile, capsys):
    ch = tmp_path / "chain"
    code, _, err = run(
        capsys, "chain", "build", "--key", str(keyfile), "--stages", "thorp:6,pair-map,swap-or-not:6,both-ends",
        "--seed", "5", "--out", str(ch),
    )
    assert code == 0 and "chain=" in err
    ct = tmp_path / "c.ct"
    run(capsys, "encrypt", "--key", str(keyfile), "--message", "chained", "--chain", str(ch), "--out", str(ct))
    code, out, _ = run(capsys, "decrypt", "--key", str(keyfile), "--ct", str(ct), "--chain", str(ch))
    assert code == 0 and out == "chained"
    # missing chain file is a usage error
    assert run(capsys, "decrypt", "--key", str(keyfile), "--ct", str(ct))[0] == 2


def test_chain_mismatch_is_wrong_key(tmp_path, keyfile, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "chain", "build", "--key", str(keyfile), "--stages", "thorp:4", "--seed", "1", "--out", str(a))
    run(capsys, "chain", "build", "--key", str(keyfile), "--stages", "thorp:4", "--seed", "2", "--out", str(b))
    ct = tmp_path / "c.ct"
    run(capsys, "encrypt", "--key", str(keyfile), "--message", "m", "--chain", str(a), "--out", str(ct))
    assert run(capsys, "decrypt", "--key", str(keyfile), "--ct", str(ct), "--chain", str(b))[0] == 3


def test_chain_apply_invert(tmp_path, capsys):
    ch = tmp_path / "chain"
    run(capsys, "chain", "build", "--p", "3fb", "--stages", "swap-neighbors,thorp:5", "--seed", "9", "--out", str(ch))
    code, out, _ = run(capsys, "chain", "apply", "--chain", str(ch), "--value", "1c8")
    assert code == 0
    code, back, err = run(capsys, "chain", "invert", "--chain", str(ch), "--value", out.strip())
    assert back.strip() == "1c8" and "depth=" in err


def test_chain_build_validates_sizes(capsys):
    code, _, err = run(capsys, "chain", "build", "--p", f"{(1 << 384) + 1:x}", "--stages", "cycle-walk-fpe")
    assert code == 4 and "both-ends" in err


def test_chain_bench_json(capsys):
    code, out, _ = run(capsys, "chain", "bench", "--p", f"{bench_primes()[512]:x}", "--trials", "2", "--json")
    data = json.loads(out)
    assert code == 0 and set(data["median_seconds"]) == {"Cubing", "AES-256", "Thorp", "Swap-Or-Not", "Mix-And-Cut"}


# -- attacks and bench --------------------------------------------------------------------------


def test_attack_gcd_single(capsys):
    code, out, _ = run(capsys, "attack", "gcd-swap", "--p", "23", "--m", "5", "--signs", "1,1")
    assert code == 0
    assert "m=5 c=11 recovered=5 ok=1" in out
    assert out.splitlines()[-1].startswith("verdict:")


def test_attack_fixed_base(capsys):
    code, out, _ = run(capsys, "attack", "fixed-base", "--p", "23", "--x", "5", "--g", "5", "--parallel", "2")
    assert code == 0 and "value=5" in out and "verdict:" in out
    code, out, _ = run(capsys, "attack", "fixed-base", "--memory", "70034")
    assert "MiB=584.68" in out


def test_attack_ekera_deterministic(capsys):
    first = run(capsys, "attack", "ekera", "--x", "7", "--trials", "4", "--seed", "3")[1]
    second = run(capsys, "attack", "ekera", "--x", "7", "--trials", "4", "--seed", "3")[1]
    assert first == second
    assert first.count("trial=") == 4 and "verdict:" in first


def test_bench_json(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "512", "--trials", "2", "--json")
    row = json.loads(out)["results"][0]
    assert code == 0 and row["bits"] == 512 and row["ratio"] > 1


def test_calibrate_json(capsys):
    code, out, _ = run(capsys, "calibrate", "--duration", "0.6", "--json", "--seed", "1")
    data = json.loads(out)
    rates = {int(k): v for k, v in data["lambda"].items()}
    assert code == 0 and rates[4096] > rates[70034]
    table = {int(k): v for k, v in data["recommended_log2_p"].items()}
    assert table[1] < table[5] < table[30] < table[60]


def test_recommended_bits_solves_fixed_point():
    # constant speed: the answer is simply lambda * T
    assert cli.recommended_bits({1000: 500.0, 2000: 500.0}, 4) == 2000
    # falling speed: n sits where n = lambda(n) * T, between the measured sizes
    rates = {4096: 100_000.0, 16384: 10_000.0, 70034: 1_000.0}
    n = cli.recommended_bits(rates, 10)
    assert 16384 < n < 70034
    assert cli.recommended_bits(rates, 20) > n
