import json
from pathlib import Path

import numpy as np

import todakit as tk
from todakit.cli import (
    boundary_to_document,
    dumps_deterministic,
    grid_to_document,
    main,
    system_to_document,
)
from todakit.solver import liouville_boundary, liouville_field
from todakit.toda import emit_equations

GOLDEN = Path(__file__).parent / "golden"


def write_json(path: Path, doc) -> str:
    text = dumps_deterministic(doc) + "\n"
    path.write_text(text)
    return text


def test_golden_files_are_reproducible():
    spec5 = tk.GridSpec(0.0, 8.0, 0.25, 0.25, 5, 5)
    lv5 = liouville_field(spec5)
    assert (GOLDEN / "system_liouville.json").read_text() == \
        dumps_deterministic(system_to_document(lv5.system, lv5.c)) + "\n"
    assert (GOLDEN / "grid_liouville_5x5.json").read_text() == \
        dumps_deterministic(grid_to_document(lv5.system, lv5.field)) + "\n"
    spec9 = tk.GridSpec(0.0, 8.0, 0.125, 0.125, 9, 9)
    assert (GOLDEN / "boundary_liouville_9x9.json").read_text() == \
        dumps_deterministic(boundary_to_document(lv5.system, liouville_boundary(spec9))) + "\n"
    sys_c = tk.build_system(tk.SeriesTag("C", 2), (1, 2, 1))
    assert (GOLDEN / "equations_C2_121_structured.json").read_text() == \
        dumps_deterministic(emit_equations(sys_c, "structured")) + "\n"


def test_grade_text(capsys):
    assert main(["grade", "--series", "A", "--rank", "2", "--labels", "1,0"]) == 0
    out = capsys.readouterr().out
    assert "q = diag(2/3, -1/3, -1/3)" in out
    assert "G0 = GL(1) x GL(2)" in out


def test_grade_structured_uses_exact_strings(capsys):
    assert main(["grade", "--series", "B", "--rank", "3", "--labels", "0,1,0",
                 "--format", "structured"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["block_sizes"] == [2, 3, 2]
    assert doc["levi_type"] == "GL(2) x SO(3)"
    assert all("/" in level or level.lstrip("-").isdigit() for level in doc["levels"])


def test_grade_rejects_zero_labels(capsys):
    assert main(["grade", "--series", "D", "--rank", "3", "--labels", "0,0,0"]) == 2
    assert "error[input]" in capsys.readouterr().err


def test_equations_inline_and_invalid(capsys):
    assert main(["equations", "--series", "C", "--rank", "2", "--blocks", "1,2,1"]) == 0
    out = capsys.readouterr().out
    assert "Jtilde_1" in out
    assert main(["equations", "--series", "D", "--rank", "3", "--blocks", "1,2,2"]) == 2
    assert "error[input]" in capsys.readouterr().err


def test_equations_from_system_file(tmp_path, capsys):
    spec = tk.GridSpec(0.0, 8.0, 0.25, 0.25, 5, 5)
    lv = liouville_field(spec)
    system_file = tmp_path / "system.json"
    write_json(system_file, system_to_document(lv.system, lv.c))
    assert main(["equations", "--system", str(system_file), "--format", "structured"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["constraint_set"] == "A-none"


def test_verify_pass_and_fail(tmp_path, capsys):
    spec = tk.GridSpec(0.0, 7.0, 1.0 / 64, 1.0 / 64, 65, 65)
    lv = liouville_field(spec)
    system_file = tmp_path / "system.json"
    grid_file = tmp_path / "grid.json"
    write_json(system_file, system_to_document(lv.system, lv.c))
    write_json(grid_file, grid_to_document(lv.system, lv.field))
    assert main(["verify", "--system", str(system_file), "--grid", str(grid_file)]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out

    # constant non-solution: unit field with unit couplings
    bad_system = tk.build_system(tk.SeriesTag("A", 1), (1, 1))
    bad_c = tk.make_c_blocks(bad_system, [np.array([[1.0]])], [np.array([[1.0]])])
    spec_small = tk.GridSpec(0.0, 2.0, 0.25, 0.25, 5, 5)
    ones = np.ones((5, 5, 1, 1), dtype=complex)
    bad_field = tk.GridField(spec_small, (ones, ones.copy()))
    write_json(system_file, system_to_document(bad_system, bad_c))
    write_json(grid_file, grid_to_document(bad_system, bad_field))
    assert main(["verify", "--system", str(system_file), "--grid", str(grid_file),
                 "--format", "structured"]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "fail"
    assert abs(doc["full_residual"]["max"] - 1.0) < 1e-12


def test_verify_mismatched_blocks(tmp_path, capsys):
    spec = tk.GridSpec(0.0, 8.0, 0.25, 0.25, 5, 5)
    lv = liouville_field(spec)
    other = tk.build_system(tk.SeriesTag("A", 2), (1, 2))
    other_c = tk.make_c_blocks(other, [np.zeros((2, 1))], [np.zeros((1, 2))])
    system_file = tmp_path / "system.json"
    grid_file = tmp_path / "grid.json"
    write_json(system_file, system_to_document(other, other_c))
    write_json(grid_file, grid_to_document(lv.system, lv.field))
    assert main(["verify", "--system", str(system_file), "--grid", str(grid_file)]) == 2
    assert "error[input]" in capsys.readouterr().err


def test_solve_verify_round_trip(tmp_path, capsys):
    spec = tk.GridSpec(0.0, 8.0, 1.0 / 32, 1.0 / 32, 33, 33)
    lv = liouville_field(spec)
    system_file = tmp_path / "system.json"
    boundary_file = tmp_path / "boundary.json"
    out_file = tmp_path / "solved.json"
    write_json(system_file, system_to_document(lv.system, lv.c))
    write_json(boundary_file, boundary_to_document(lv.system, liouville_boundary(spec)))
    assert main(["solve", "--system", str(system_file), "--boundary", str(boundary_file),
                 "--out", str(out_file), "--grid", "33"]) == 0
    capsys.readouterr()
    assert main(["verify", "--system", str(system_file), "--grid", str(out_file),
                 "--tol", "1e-4"]) == 0
    capsys.readouterr()

    # byte determinism of the solve output
    first = out_file.read_bytes()
    assert main(["solve", "--system", str(system_file), "--boundary", str(boundary_file),
                 "--out", str(out_file)]) == 0
    capsys.readouterr()
    assert out_file.read_bytes() == first


def test_solve_singular_corner(tmp_path, capsys):
    spec = tk.GridSpec(0.0, 2.0, 0.25, 0.25, 5, 5)
    lv = liouville_field(spec)
    data = liouville_boundary(spec)
    doc = boundary_to_document(lv.system, data)
    doc["left"][0][2] = [[0.0, 0.0]]  # kill one sample
    system_file = tmp_path / "system.json"
    boundary_file = tmp_path / "boundary.json"
    write_json(system_file, system_to_document(lv.system, lv.c))
    write_json(boundary_file, doc)
    assert main(["solve", "--system", str(system_file), "--boundary", str(boundary_file),
                 "--out", str(tmp_path / "x.json")]) == 2
    assert "error[input]" in capsys.readouterr().err


def test_solve_blowup_exit_code(tmp_path, capsys):
    system = tk.build_system(tk.SeriesTag("A", 1), (1, 1))
    c = tk.make_c_blocks(system, [np.array([[1.0]])], [np.array([[1.0]])])
    spec = tk.GridSpec(0.0, 0.0, 1.0 / 16, 0.9 / 16, 17, 17)
    anti = lambda zm, zp: (1.5 - zp) - zm
    left1 = np.array([[[anti(zm, 0.0)]] for zm in spec.z_minus], dtype=complex)
    bottom1 = np.array([[[anti(0.0, zp)]] for zp in spec.z_plus], dtype=complex)
    data = tk.CharacteristicData(spec, (left1, 1 / left1), (bottom1, 1 / bottom1))
    system_file = tmp_path / "system.json"
    boundary_file = tmp_path / "boundary.json"
    write_json(system_file, system_to_document(system, c))
    write_json(boundary_file, boundary_to_document(system, data))
    assert main(["solve", "--system", str(system_file), "--boundary", str(boundary_file),
                 "--out", str(tmp_path / "x.json")]) == 4
    assert "error[blow-up]" in capsys.readouterr().err


def test_solve_non_convergence_exit_code(tmp_path, capsys):
    system = tk.build_system(tk.SeriesTag("A", 1), (1, 1))
    c = tk.make_c_blocks(system, [np.array([[100.0]])], [np.array([[100.0]])])
    spec = tk.GridSpec(0.0, 2.0, 0.5, 0.5, 5, 5)
    ones = np.ones((5, 1, 1), dtype=complex)
    data = tk.CharacteristicData(spec, (ones, ones.copy()), (ones.copy(), ones.copy()))
    system_file = tmp_path / "system.json"
    boundary_file = tmp_path / "boundary.json"
    write_json(system_file, system_to_document(system, c))
    write_json(boundary_file, boundary_to_document(system, data))
    assert main(["solve", "--system", str(system_file), "--boundary", str(boundary_file),
                 "--out", str(tmp_path / "x.json")]) == 5
    assert "error[no-convergence]" in capsys.readouterr().err


def test_missing_file_exit_code(capsys):
    assert main(["verify", "--system", "/nonexistent.json", "--grid", "/also-nope.json"]) == 2
    assert "error[input]" in capsys.readouterr().err


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 5 and "FAIL" not in out
