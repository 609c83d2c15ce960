import numpy as np
import pytest

from tmdl_plots import PlotSpec, render
from tmdl_plots.cli import main
from tmdl_plots.render import SchemaError


def write_staircase(path, var="g", n0=-0.5, jumps=()):
    x = np.linspace(0, 2, 21)
    n = np.full_like(x, n0)
    flag = np.zeros_like(x, dtype=int)
    for j in jumps:
        n[x >= j] += 1.0
        flag[np.searchsorted(x, j)] = 1
    lines = [f"{var},n,jump_flag"]
    lines += [f"{a:.17g},{b:.17g},{int(c)}" for a, b, c in zip(x, n, flag)]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_scan_grid(path, var="g"):
    lines = [f"t,{var},phase,psi1,psi2,n"]
    for v in np.linspace(0.5, 1.5, 6):
        for t in np.linspace(0, 0.5, 6):
            phase = "MI" if t < 0.2 + 0.1 * v else "SF"
            psi = 0.0 if phase == "MI" else 0.3
            lines.append(f"{t:.17g},{v:.17g},{phase},{psi},{psi},{-0.5}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_boundary(path, var="g", scale=1.0):
    lines = [f"{var},t_c,zt_c,n_lobe,degenerate_flag"]
    for v in np.linspace(0.5, 1.5, 11):
        tc = scale * (0.25 + 0.1 * np.sin(3 * v))
        lines.append(f"{v:.17g},{tc:.17g},{2 * tc:.17g},-0.5,0")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_gap_profile(path):
    lines = ["g,gap1,gap2,n0,n1"]
    for g in np.linspace(0, 2, 11):
        lines.append(f"{g:.17g},{np.exp(-g):.17g},{0.5 + np.exp(-g):.17g},"
                     f"-0.5,0.5")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture()
def golden(tmp_path):
    return {
        "st1": write_staircase(tmp_path / "st1.csv"),
        "st3": write_staircase(tmp_path / "st3.csv", n0=-1.5, jumps=(0.8,)),
        "st_mu": write_staircase(tmp_path / "st_mu.csv", var="mu", n0=-0.5,
                                 jumps=(0.4, 0.7)),
        "grid": write_scan_grid(tmp_path / "grid.csv"),
        "grid_mu": write_scan_grid(tmp_path / "grid_mu.csv", var="mu"),
        "b1": write_boundary(tmp_path / "b1.csv"),
        "b2": write_boundary(tmp_path / "b2.csv", scale=0.9),
        "b3": write_boundary(tmp_path / "b3.csv", scale=0.8),
        "gap": write_gap_profile(tmp_path / "gap.csv"),
        "dir": tmp_path,
    }


class TestFiveFigureKinds:
    def test_staircase_family(self, golden):
        out = render(PlotSpec("staircase", [str(golden["st1"]),
                                            str(golden["st3"])],
                              str(golden["dir"] / "fig1.png"),
                              labels=["N=1", "N=3"]))
        assert out.stat().st_size > 0

    def test_phase_diagram_with_overlay(self, golden):
        out = render(PlotSpec("phase-diagram", [str(golden["grid"])],
                              str(golden["dir"] / "fig2.png"),
                              boundary_paths=[str(golden["b1"])]))
        assert out.stat().st_size > 0

    def test_phase_diagram_mu_axis(self, golden):
        out = render(PlotSpec("phase-diagram", [str(golden["grid_mu"])],
                              str(golden["dir"] / "fig3a.png")))
        assert out.stat().st_size > 0

    def test_mu_staircase(self, golden):
        out = render(PlotSpec("staircase", [str(golden["st_mu"])],
                              str(golden["dir"] / "fig3b.png")))
        assert out.stat().st_size > 0

    def test_boundary_overlay(self, golden):
        out = render(PlotSpec("boundary-overlay",
                              [str(golden["b1"]), str(golden["b2"]),
                               str(golden["b3"])],
                              str(golden["dir"] / "fig5.png"),
                              labels=["1", "1.05", "1.1"]))
        assert out.stat().st_size > 0

    def test_gap_profile(self, golden):
        out = render(PlotSpec("gap-profile", [str(golden["gap"])],
                              str(golden["dir"] / "figB1.png")))
        assert out.stat().st_size > 0


class TestStability:
    @pytest.mark.parametrize("suffix", [".png", ".svg"])
    def test_rerender_byte_identical(self, golden, suffix):
        def once(name):
            return render(PlotSpec("staircase", [str(golden["st3"])],
                                   str(golden["dir"] / name))).read_bytes()

        assert once(f"a{suffix}") == once(f"b{suffix}")

    def test_inputs_not_mutated(self, golden):
        before = golden["st3"].read_bytes()
        render(PlotSpec("staircase", [str(golden["st3"])],
                        str(golden["dir"] / "x.png")))
        assert golden["st3"].read_bytes() == before


class TestErrors:
    def test_schema_mismatch(self, golden):
        with pytest.raises(SchemaError, match="missing columns"):
            render(PlotSpec("gap-profile", [str(golden["st1"])],
                            str(golden["dir"] / "bad.png")))

    def test_unknown_kind(self, golden):
        with pytest.raises(SchemaError, match="unknown figure kind"):
            render(PlotSpec("pie", [str(golden["st1"])],
                            str(golden["dir"] / "bad.png")))

    def test_missing_file(self, golden):
        with pytest.raises(FileNotFoundError):
            render(PlotSpec("staircase", [str(golden["dir"] / "nope.csv")],
                            str(golden["dir"] / "bad.png")))

    def test_cli_error_exit(self, golden, capsys):
        assert main(["gap-profile", str(golden["st1"]),
                     "--out", str(golden["dir"] / "bad.png")]) == 1
        assert "missing columns" in capsys.readouterr().err


class TestCli:
    def test_cli_renders(self, golden, capsys):
        out = golden["dir"] / "cli.png"
        assert main(["staircase", str(golden["st1"]), "--out", str(out)]) == 0
        assert out.exists()
