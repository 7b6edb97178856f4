import json

from floerforge.cli import main
from floerforge.corpus import canonical_json, corpus_builders, corpus_dir, load_complex, write_corpus


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_surgery_trefoil_json(capsys):
    code, out, _ = run(capsys, "surgery", "--complex", "trefoil", "--n", "0")
    assert code == 0
    data = json.loads(out)
    assert data["decomposition"]["towers"] == ["-3/2", "-1/2"]
    assert data["decomposition"]["torsion"] == []


def test_surgery_output_is_byte_stable(capsys):
    _, first, _ = run(capsys, "surgery", "--complex", "figure8", "--n", "0")
    _, second, _ = run(capsys, "surgery", "--complex", "figure8", "--n", "0")
    assert first == second


def test_surgery_table_descending(capsys):
    code, out, _ = run(capsys, "surgery", "--complex", "figure8", "--n", "0", "--format", "table")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split() == ["grading", "towers", "reduced"]
    gradings = [line.split()[0] for line in lines[1:]]
    assert gradings == ["1/2", "-1/2"]


def test_cfk_unknot_table(capsys):
    code, out, _ = run(capsys, "cfk", "--complex", "unknot")
    assert code == 0
    data = json.loads(out)
    assert data["hfk_hat"] == {"(0,0)": 1}
    assert data["numerics"] == {"genus": 0, "tau": 0}


def test_double_pipeline_round_trip(tmp_path, capsys):
    out_file = tmp_path / "double.json"
    code, _, _ = run(
        capsys, "double", "--complex", "k3", "--sign", "+",
        "--iterations", "2", "--out", str(out_file),
    )
    assert code == 0
    from floerforge.cfk import KnotComplex
    from floerforge.whitehead import box_parameters

    doubled = KnotComplex.from_json(json.loads(out_file.read_text()))
    params = box_parameters(doubled)
    # Second double: boxes at k spawn boxes at k and k - 1, squared.
    assert len(params) == 32 and max(params) == 1


def test_endfloer_command(capsys):
    code, out, _ = run(capsys, "endfloer", "--knot", "k3", "--handle", "ch+")
    assert code == 0
    data = json.loads(out)
    assert data["max_nontrivial_grading"] == "0"
    assert data["per_grading"]["0"] == {"rank": "inf", "tag": "exact"}


def test_endfloer_negative_handle(capsys):
    code, out, _ = run(capsys, "endfloer", "--knot", "k3", "--handle", "ch-")
    assert code == 0
    assert json.loads(out)["vanishes"] is True


def test_distinguish_command(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text(json.dumps({"knot": "k3", "handle": "ch+"}))
    b.write_text(json.dumps({"knot": "k5", "handle": "ch+"}))
    code, out, _ = run(capsys, "distinguish", "--a", str(a), "--b", str(b))
    assert code == 0
    data = json.loads(out)
    assert data["distinct"] is True


def test_distinguish_sum_operand(tmp_path, capsys):
    a = tmp_path / "a.json"
    a.write_text(
        json.dumps(
            {
                "summands": [
                    {"knot": "k3", "handle": "ch+"},
                    {"knot": "k3", "handle": "ch+", "orientation": "-"},
                ]
            }
        )
    )
    b = tmp_path / "b.json"
    b.write_text(json.dumps({"knot": "k3", "handle": "ch+"}))
    code, out, _ = run(capsys, "distinguish", "--a", str(a), "--b", str(b))
    assert code == 0
    assert json.loads(out)["distinct"] is True


def test_missing_file_is_usage_error(capsys):
    code, _, err = run(capsys, "surgery", "--complex", "no-such-file.json", "--n", "0")
    assert code == 2
    assert "no-such-file" in err


def test_corrupt_file_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "surgery", "--complex", str(bad), "--n", "0")
    assert code == 2


def test_domain_error_exit_code(tmp_path, capsys):
    # A complex without a flip cannot be surgered: domain error, exit 1.
    from floerforge.cfk import figure8, KnotComplex

    naked = KnotComplex(figure8().base, figure8().alexander, None, figure8().ambient)
    path = tmp_path / "naked.json"
    path.write_text(canonical_json(naked.to_json()))
    code, _, err = run(capsys, "surgery", "--complex", str(path), "--n", "0")
    assert code == 1
    assert "flip" in err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["surgery", "--complex", "unknot", "--wat"]) == 2


def test_verify_filter_runs_subset(capsys):
    code, out, _ = run(capsys, "verify", "--filter", "surgery")
    assert code == 0
    assert "1.unknot" in out
    assert "6.max.n3" not in out


def test_corpus_env_override(tmp_path, monkeypatch, capsys):
    write_corpus(tmp_path)
    # Corrupt one entry; loading through the override must fail cleanly.
    (tmp_path / "trefoil.json").write_text("{}")
    monkeypatch.setenv("FLOERFORGE_CORPUS", str(tmp_path))
    code, _, err = run(capsys, "surgery", "--complex", "trefoil", "--n", "0")
    assert code == 2


def test_verify_corpus_row_catches_corruption(tmp_path, monkeypatch, capsys):
    write_corpus(tmp_path)
    (tmp_path / "trefoil.json").write_text("{not json")
    monkeypatch.setenv("FLOERFORGE_CORPUS", str(tmp_path))
    code, out, _ = run(capsys, "verify", "--filter", "7.corpus")
    assert code == 1
    assert "trefoil" in out


def test_verify_corpus_row_passes_on_shipped_files(capsys):
    code, out, _ = run(capsys, "verify", "--filter", "7.corpus")
    assert code == 0
    assert "7.corpus" in out


def test_corpus_files_match_builders():
    # Shipped corpus bytes equal a fresh regeneration of every builder.
    directory = corpus_dir()
    for name, build in corpus_builders().items():
        path = directory / f"{name}.json"
        assert path.is_file(), f"missing corpus file {name}"
        assert path.read_text(encoding="utf-8") == canonical_json(build().to_json())


def test_corpus_round_trips():
    for name in corpus_builders():
        kc = load_complex(name)
        assert kc.to_json() == json.loads((corpus_dir() / f"{name}.json").read_text())
