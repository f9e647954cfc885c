import pytest

from app.agent.actions import ActionSpace
from app.baselines.views import OracleLabel
from app.datasetgen.generator import (
    flag_duplicates,
    generate,
    load_manifest,
    load_nests,
    program_nests,
    render_program,
    split_programs,
)
from app.datasetgen.report import report_optimum_distribution
from app.datasetgen.templates import select_templates
from app.datasetgen.views import KernelSpec
from app.errors import ConfigurationError, DatasetError, MissingOracleResultError, UnknownTemplateError


def _tree(root):
    return {path.relative_to(root).as_posix(): path.read_bytes() for path in sorted(root.rglob("*")) if path.is_file()}


def test_same_seed_gives_identical_corpus(tmp_path):
    templates = select_templates()
    generate(templates, 8, 11, tmp_path / "a", train_fraction=0.75, reps=3)
    generate(templates, 8, 11, tmp_path / "b", train_fraction=0.75, reps=3, workers=3)
    first = _tree(tmp_path / "a")
    assert first == _tree(tmp_path / "b")
    assert len(first) == 9


def test_different_seeds_give_different_programs(tmp_path):
    templates = select_templates(["assignment"])
    generate(templates, 3, 1, tmp_path / "a", reps=3)
    generate(templates, 3, 2, tmp_path / "b", reps=3)
    assert _tree(tmp_path / "a") != _tree(tmp_path / "b")


def test_manifest_records(tiny_corpus):
    out, manifest = tiny_corpus
    assert manifest.count == 12
    assert [r.program_id for r in manifest.records] == [f"p{i:05d}" for i in range(12)]
    assert [r.template_id for r in manifest.records] == [t.template_id for t in select_templates()]
    assert len(manifest.split_ids("train")) == 9
    assert len(manifest.split_ids("test")) == 3
    for record in manifest.records:
        assert (out / record.path).exists()
        assert record.nest_count >= 1


def test_load_manifest(tiny_corpus, tmp_path):
    out, manifest = tiny_corpus
    assert load_manifest(out).model_dump() == manifest.model_dump()
    assert load_manifest(out / "manifest.json").model_dump() == manifest.model_dump()
    with pytest.raises(DatasetError):
        load_manifest(tmp_path / "nowhere")
    broken = tmp_path / "broken.json"
    broken.write_text("{\"seed\": 1}")
    with pytest.raises(DatasetError):
        load_manifest(broken)


def test_load_nests_skips_the_driver(tiny_corpus):
    out, manifest = tiny_corpus
    nests = load_nests(manifest, out)
    assert sorted(nests) == [r.program_id for r in manifest.records]
    assert all(nest.function == "kernel" for nest in nests.values())
    assert sorted(load_nests(manifest, out, "test")) == sorted(manifest.split_ids("test"))


def test_generate_rejects_bad_arguments(tmp_path):
    with pytest.raises(ConfigurationError):
        generate(select_templates(), 0, 1, tmp_path)
    with pytest.raises(ConfigurationError):
        generate([], 3, 1, tmp_path)
    with pytest.raises(ConfigurationError):
        generate(select_templates(), 3, -1, tmp_path)


def test_select_templates():
    assert len(select_templates()) == 12
    assert [t.template_id for t in select_templates(["matmul", "reduction"])] == ["matmul", "reduction"]
    with pytest.raises(UnknownTemplateError) as excinfo:
        select_templates(["matmul", "fft"])
    assert excinfo.value.context == {"unknown": ["fft"]}


def test_render_program():
    spec = KernelSpec(defines={"N": 8}, globals=["int a[N];"], body=["for (int i = 0; i < N; i++)", "    a[i] = i;"])
    source = render_program("p00042", "assignment", spec, reps=7)

    assert source.startswith("/* p00042: assignment */\n")
    assert "#define N 8\n#define REPS 7\n" in source
    assert "int main(void)" in source
    nests = program_nests(source, "programs/p00042.c")
    assert len(nests) == 1
    assert nests[0].function == "kernel"
    assert nests[0].nest_id.startswith("programs/p00042.c:")


def test_split_covers_every_template():
    ids = [f"p{i:05d}" for i in range(6)]
    templates = ["a"] * 5 + ["b"]
    splits = split_programs(ids, templates, 0.5, seed=0)
    test = [pid for pid in ids if splits[pid] == "test"]
    assert len(test) == 3
    assert {templates[ids.index(pid)] for pid in test} == {"a", "b"}


def test_stratified_split():
    ids = [f"p{i:05d}" for i in range(24)]
    templates = [f"t{i % 12}" for i in range(24)]
    splits = split_programs(ids, templates, 0.5, seed=4)
    test_templates = [templates[i] for i, pid in enumerate(ids) if splits[pid] == "test"]
    assert sorted(test_templates) == sorted(set(templates))


def test_degenerate_splits():
    assert split_programs(["p0"], ["a"], 0.5, 0) == {"p0": "train"}
    assert set(split_programs(["p0", "p1"], ["a", "b"], 1.0, 0).values()) == {"train"}


def test_flag_duplicates(tiny_corpus):
    _, manifest = tiny_corpus
    first, second = manifest.records[:2]
    twin = second.model_copy(update={"normalized_digest": first.normalized_digest, "duplicate_of": None})
    flagged = flag_duplicates([first, twin])
    assert flagged[0].duplicate_of is None
    assert flagged[1].duplicate_of == first.program_id


def _label(program_id, vf, if_):
    return OracleLabel(program_id=program_id, vf=vf, if_=if_, time=1.0, full_grid={})


def test_optimum_histogram(tiny_corpus):
    _, manifest = tiny_corpus
    labels = {r.program_id: _label(r.program_id, 4, 4) for r in manifest.records}
    labels["p00000"] = _label("p00000", 1, 2)

    histogram = report_optimum_distribution(manifest, labels, ActionSpace(4, 4))
    assert histogram.total == 12
    assert len(histogram.cells) == 9
    assert (histogram.mode_vf, histogram.mode_if) == (4, 4)
    cells = {(cell.vf, cell.if_): cell for cell in histogram.cells}
    assert cells[(4, 4)].count == 11
    assert cells[(1, 2)].percent == pytest.approx(100 / 12)
    assert cells[(2, 2)].count == 0
    assert [(c.vf, c.if_) for c in histogram.cells] == sorted(cells)


def test_histogram_needs_every_label(tiny_corpus):
    _, manifest = tiny_corpus
    with pytest.raises(MissingOracleResultError):
        report_optimum_distribution(manifest, {"p00000": _label("p00000", 1, 1)})
