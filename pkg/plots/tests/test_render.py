import hashlib
import os
import subprocess
import sys

import pytest

from quarticbath_plots import FIGURES, FigureSpec, render
from quarticbath_plots.cli import main
from quarticbath_plots.figures import ArtifactError

FIX = os.path.join(os.path.dirname(__file__), "fixtures")


def _sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


@pytest.mark.parametrize("ext", ["png", "svg"])
@pytest.mark.parametrize("fid", sorted(FIGURES))
def test_every_figure_renders_deterministically(fid, ext, tmp_path):
    a = tmp_path / f"a.{ext}"
    b = tmp_path / f"b.{ext}"
    render(FigureSpec(fid, FIX, str(a)))
    render(FigureSpec(fid, FIX, str(b)))
    assert a.stat().st_size > 0
    assert _sha(a) == _sha(b)


def test_missing_artifact_error_names_path(tmp_path):
    bare = tmp_path / "bare"
    bare.mkdir()
    with pytest.raises(ArtifactError) as err:
        render(FigureSpec("flux", str(bare), str(tmp_path / "o.png")))
    assert os.path.join(str(bare), "flux.csv") in str(err.value)


def test_missing_column_error_names_path_and_column(tmp_path):
    d = os.path.join(FIX, "missing_col")
    with pytest.raises(ArtifactError) as err:
        render(FigureSpec("flux", d, str(tmp_path / "o.png")))
    msg = str(err.value)
    assert os.path.join(d, "flux.csv") in msg
    assert "Q" in msg


def test_all_censored_gap_times_render_as_empty_histogram(tmp_path):
    out = tmp_path / "g.png"
    render(FigureSpec("gaptime", os.path.join(FIX, "empty_gap"), str(out)))
    assert out.stat().st_size > 0


def test_unknown_extension_rejected(tmp_path):
    with pytest.raises(ArtifactError):
        render(FigureSpec("flux", FIX, str(tmp_path / "o.pdf")))


def test_cli_success(tmp_path):
    out = tmp_path / "f.png"
    assert main(["--figure", "flux", "--input", FIX,
                 "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_cli_missing_artifact_exit_and_stderr(tmp_path, capsys):
    code = main(["--figure", "tubes", "--input", str(tmp_path),
                 "--out", str(tmp_path / "t.png")])
    assert code == 1
    assert os.path.join(str(tmp_path), "tube.csv") in capsys.readouterr().err


def test_cli_rejects_unknown_figure(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["--figure", "histograms", "--input", FIX,
              "--out", str(tmp_path / "o.png")])
    assert err.value.code == 2


def test_cli_rejects_bad_extension(tmp_path, capsys):
    code = main(["--figure", "flux", "--input", FIX,
                 "--out", str(tmp_path / "o.pdf")])
    assert code == 1
    assert "o.pdf" in capsys.readouterr().err


def test_cli_entry_via_module(tmp_path):
    out = tmp_path / "p.svg"
    r = subprocess.run(
        [sys.executable, "-m", "quarticbath_plots.cli", "--figure",
         "poincare", "--input", FIX, "--out", str(out)],
        capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert out.stat().st_size > 0


def test_plots_package_never_imports_the_solver():
    probe = ("import sys\n"
             "import quarticbath_plots, quarticbath_plots.cli\n"
             "bad = [m for m in sys.modules\n"
             "       if m == 'quarticbath' or m.startswith('quarticbath.')]\n"
             "sys.exit(1 if bad else 0)\n")
    r = subprocess.run([sys.executable, "-c", probe],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stdout + r.stderr
