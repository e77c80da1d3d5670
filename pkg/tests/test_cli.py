import subprocess
import sys

import pytest

from stegcap.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def data_rows(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_capacity_sum_rates(capsys):
    code, out, _ = run(capsys, "capacity", "--steganalyzer", "sum", "--n-max", "20")
    assert code == 0
    rows = data_rows(out)
    assert rows[0] == "n,count,rate_bits,bound_low_bits,bound_high_bits"
    assert rows[4].startswith("4,11,")
    assert rows[20].startswith("20,616666,")
    assert "# base=2" in out and "# budget=16777216" in out


def test_capacity_awgn_prints_bits(capsys):
    code, out, _ = run(capsys, "capacity", "--awgn", "c=3,se2=1,sa2=1")
    assert code == 0 and out.strip() == "0.5 bits"


def test_capacity_awgn_csv_to_file(tmp_path, capsys):
    path = tmp_path / "c.csv"
    code, out, _ = run(capsys, "capacity", "--awgn", "c=3,se2=1,sa2=1", "--base", "e", "--out", str(path))
    assert code == 0 and out.strip().endswith("nats")
    text = path.read_bytes().decode()
    assert "\r" not in text and "c,se2,sa2,capacity_nats" in text


def test_demo_two_noise(capsys):
    code, out, _ = run(capsys, "demo", "two-noise", "--n", "5")
    assert code == 0
    header, row = data_rows(out)
    assert dict(zip(header.split(","), row.split(",")))["rate_bits"] == "0.8"


def test_demo_sphere_packing(capsys):
    code, out, _ = run(capsys, "demo", "sphere-packing", "--awgn", "c=3,se2=1,sa2=0", "--n", "10")
    assert code == 0 and data_rows(out)[0] == "n,log_count_bits,rate_bits"


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--steganalyzer", "sum", "--n", "3")
    assert code == 0
    assert data_rows(out) == ["0 0 0", "0 0 1", "0 1 0", "1 0 0"]


def test_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--source", "0.5,0.5", "--channel", "bsc:0.1", "--n", "3")
    assert code == 0 and data_rows(out)[0] == "value_bits,probability"
    code, out, _ = run(capsys, "spectrum", "--steganalyzer", "sum", "--n", "4")
    assert code == 0 and len(data_rows(out)) == 2


def test_simulate_is_byte_identical(tmp_path, capsys):
    args = ["simulate", "--awgn", "c=3,se2=1,sa2=1", "--rate", "0.35", "--n", "64", "--draws", "300", "--seed", "9"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"n,rate_bits,epsilon,delta,ci_half_width\n" in a.read_bytes()
    assert b"# margin=0.15" in a.read_bytes()


def test_simulate_feinstein(capsys):
    code, out, _ = run(capsys, "simulate", "--channel", "bsc:0.05", "--source", "0.5,0.5", "--n", "4",
                       "--gamma", "0.1", "--M", "2")
    assert code == 0 and data_rows(out)[0].startswith("n,M,rate_bits,epsilon")


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# composite detector\nsteganalyzer.variant = mean_sign\nsteganalyzer.direction = negative\nn_max = 5\n")
    code, out, _ = run(capsys, "capacity", "--config", str(cfg))
    assert code == 0 and data_rows(out)[5].startswith("5,16,")


@pytest.mark.parametrize(
    "argv,status",
    [
        (["capacity", "--steganalyzer", "bogus"], 2),
        (["capacity", "--awgn", "c=3"], 2),
        (["capacity", "--config", "/nonexistent/file"], 2),
        (["enumerate", "--steganalyzer", "sum", "--n", "30", "--budget", "1000"], 3),
        (["simulate", "--awgn", "c=1,se2=1,sa2=1", "--rate", "0.1", "--n", "8"], 4),
        (["demo", "two-noise", "--n", "4"], 2),
    ],
)
def test_exit_codes(argv, status, capsys):
    code, _, err = run(capsys, *argv)
    assert code == status and err.startswith("stegcap:")


def test_bad_config_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this line has no equals sign\n")
    assert run(capsys, "capacity", "--config", str(cfg))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stegcap.cli", "capacity", "--awgn", "c=3,se2=1,sa2=1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.5 bits"
