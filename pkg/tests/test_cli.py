"""End-to-end runs of the command line front end."""

import json

import numpy as np
import pytest

from reebflow.advect import SinProfile, shear_x
from reebflow.circulation import primitive_cochain
from reebflow.cli import main
from reebflow.mesh import dump_mesh_json, dump_mesh_off, load_mesh
from reebflow.meshes import (
    flat_torus,
    genus2_pretzel,
    octasphere,
    torus_test_field,
)


@pytest.fixture(scope="module")
def torus16():
    return flat_torus(16, torus_test_field)


@pytest.fixture()
def torus_file(torus16, tmp_path):
    path = tmp_path / "torus.json"
    path.write_bytes(dump_mesh_json(torus16))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_validate_summary(capsys, torus_file):
    code, out = run(capsys, "validate", torus_file)
    assert code == 0
    doc = json.loads(out)
    assert doc["genus"] == 1
    assert doc["critical_points"] == {"min": 1, "saddle": 2, "max": 1}
    assert doc["total_area"] == 1.0


def test_validate_off_format(capsys, tmp_path):
    path = tmp_path / "sphere.off"
    path.write_bytes(dump_mesh_off(octasphere(2)))
    code, out = run(capsys, "validate", str(path), "--format", "off")
    assert code == 0
    assert json.loads(out)["genus"] == 0


def test_reeb_summary_and_exports(capsys, torus_file, tmp_path):
    dot = tmp_path / "g.dot"
    out_json = tmp_path / "g.json"
    code, out = run(capsys, "reeb", torus_file,
                    "--dot", str(dot), "--json", str(out_json))
    assert code == 0
    doc = json.loads(out)
    assert doc == {"vertices": 4, "edges": 4, "b1": 1, "total_mass": 1.0}
    text = dot.read_text()
    assert text.count("label=") == 8  # 4 vertices + 4 edges
    wire = json.loads(out_json.read_bytes())
    assert len(wire["vertices"]) == 4
    assert len(wire["edges"]) == 4
    assert wire["total_mass"] == 1.0


def test_invariants_csv(capsys, torus_file, tmp_path):
    csv = tmp_path / "inv.csv"
    code, out = run(capsys, "invariants", torus_file, "--csv", str(csv))
    assert code == 0
    doc = json.loads(out)
    assert doc["b1"] == 1
    assert doc["global_moments"][0] == pytest.approx(1.0)
    lines = csv.read_text().strip().splitlines()
    assert len(lines) >= 5  # header plus one row per edge


def cochain_file(mesh, tmp_path, name, values):
    m = mesh.with_field(mesh.field, cochain=(mesh.topology.edges, values))
    path = tmp_path / name
    path.write_bytes(dump_mesh_json(m))
    return str(path)


def test_circulation_command(capsys, torus16, tmp_path):
    alpha = primitive_cochain(torus16)
    path = cochain_file(torus16, tmp_path, "wc.json", alpha)
    code, out = run(capsys, "circulation", path)
    assert code == 0
    doc = json.loads(out)
    assert doc["dimension"] == 1
    assert doc["axioms_pass"] is True
    assert len(doc["c_minus"]) == 4


def test_circulation_nonzero_mean_fails(capsys, torus16, tmp_path):
    alpha = primitive_cochain(torus16)
    shifted = torus16.with_field(torus16.field + 0.5)
    path = cochain_file(shifted, tmp_path, "bad.json", alpha)
    code, _ = run(capsys, "circulation", path)
    assert code == 65


def test_circulation_missing_cochain(capsys, torus_file):
    code, _ = run(capsys, "circulation", torus_file)
    assert code == 65


def test_freezing_summary(capsys, torus_file):
    code, out = run(capsys, "freezing", torus_file)
    assert code == 0
    doc = json.loads(out)
    assert doc["b1"] == 1
    assert doc["reduced_vertices"] == 1
    assert doc["reduced_edges"] == 1


def test_compare_identical_files(capsys, torus_file):
    code, out = run(capsys, "compare", "--group", "sdiff",
                    torus_file, torus_file)
    assert code == 0
    doc = json.loads(out)
    assert doc["outcome"] == "Equivalent"
    assert doc["group"] == "sdiff"


def test_compare_not_equivalent(capsys, torus16, torus_file, tmp_path):
    doubled = tmp_path / "doubled.json"
    doubled.write_bytes(dump_mesh_json(torus16.with_field(2 * torus16.field)))
    code, out = run(capsys, "compare", torus_file, str(doubled))
    assert code == 1
    assert json.loads(out)["outcome"] == "NotEquivalent"


def test_compare_inconclusive_exit(capsys, tmp_path):
    mesh = genus2_pretzel(24)
    areas = mesh.triangle_areas()
    mean = float(areas @ mesh.field[mesh.triangles].mean(axis=1))
    mesh = mesh.with_field(mesh.field - mean / mesh.total_area())
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_bytes(dump_mesh_json(mesh))
    b.write_bytes(dump_mesh_json(
        mesh.with_field(np.nextafter(mesh.field, np.inf))
    ))
    code, out = run(capsys, "compare", "--group", "sdiff0", str(a), str(b))
    assert code == 2
    assert json.loads(out)["outcome"] == "Inconclusive"


def test_compare_uses_cosets_when_both_carry_cochains(
        capsys, torus16, tmp_path):
    alpha = primitive_cochain(torus16)
    rng = np.random.default_rng(3)
    g = rng.normal(size=torus16.n_vertices)
    edges = torus16.topology.edges
    dg = g[edges[:, 1]] - g[edges[:, 0]]
    pa = cochain_file(torus16, tmp_path, "a.json", alpha)
    pb = cochain_file(torus16, tmp_path, "b.json", alpha + 1e-3 * dg)
    code, out = run(capsys, "compare", "--group", "sdiff0", pa, pb)
    assert code == 0
    doc = json.loads(out)
    assert doc["outcome"] == "Equivalent"
    assert "circulation" in doc["certificate"]


def test_compare_tolerance_flags(capsys, torus_file):
    code, out = run(capsys, "compare", torus_file, torus_file,
                    "--tol-area", "0.01", "--tol-f", "1e-3")
    assert code == 0
    tols = json.loads(out)["tolerances"]
    assert tols["tol_area"] == 0.01
    assert tols["tol_f"] == 1e-3


def test_advect_writes_remapped_mesh(capsys, torus16, torus_file, tmp_path):
    map_path = tmp_path / "map.json"
    map_path.write_text(json.dumps(shear_x(
        SinProfile([(0.25, 1, 0.0)])
    ).to_dict()))
    out_path = tmp_path / "out.json"
    code, out = run(capsys, "advect", torus_file, str(map_path),
                    "--json", str(out_path))
    assert code == 0
    assert json.loads(out)["kind"] == "shear_x"
    remapped = load_mesh(out_path.read_bytes())
    assert remapped.n_vertices == torus16.n_vertices
    assert not np.array_equal(remapped.field, torus16.field)


def test_output_bytes_deterministic(capsys, torus_file):
    code1, out1 = run(capsys, "compare", torus_file, torus_file)
    code2, out2 = run(capsys, "compare", torus_file, torus_file)
    assert (code1, out1) == (code2, out2)
    assert out1.encode("ascii")  # one ascii line
    assert out1.count("\n") == 1


def test_usage_errors_exit_64(capsys, torus_file):
    assert main(["nope"]) == 64
    assert main(["compare", torus_file]) == 64
    assert main(["compare", torus_file, torus_file,
                 "--tol-area", "-1"]) == 64
    capsys.readouterr()


def test_io_error_exit_66(capsys, tmp_path):
    assert main(["validate", str(tmp_path / "missing.json")]) == 66
    capsys.readouterr()


def test_malformed_input_exit_65(capsys, tmp_path):
    path = tmp_path / "junk.json"
    path.write_text("{not json")
    assert main(["validate", str(path)]) == 65
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
        "triangles": [[0, 1, 99]],
        "field": [0.0, 1.0, 2.0],
    }))
    assert main(["validate", str(bad)]) == 65
    capsys.readouterr()


def test_selftest_parses(capsys):
    from reebflow.cli import build_parser
    args = build_parser().parse_args(["selftest", "--seed", "7"])
    assert args.seed == 7 and args.command == "selftest"
