import hashlib
import os


import eigengaze as eg
from eigengaze.cli import main

from conftest import OBJECTS, QUERY_ANGLES, TRAIN_ANGLES


def run(*argv):
    return main([str(a) for a in argv])


def file_hashes(directory):
    return {
        name: hashlib.sha256((directory / name).read_bytes()).hexdigest()
        for name in sorted(os.listdir(directory))
    }


def synth_dataset(tmp_path, objects=OBJECTS, angles=None, seed=1):
    out = tmp_path / "imgs"
    angle_arg = ",".join(str(a) for a in (angles or TRAIN_ANGLES))
    assert run("synth", "--objects", ",".join(objects), "--out", out,
               "--angles", angle_arg, "--seed", seed) == 0
    return out


def learn_all(tmp_path, imgs, objects=OBJECTS, extra=()):
    reg = tmp_path / "registry"
    for obj in objects:
        files = sorted(imgs.glob(f"{obj}_*.pgm"))
        assert run("learn", "--object", obj, "--registry", reg, *files, *extra) == 0
    return reg


class TestSynth:
    def test_four_objects_forty_files(self, tmp_path):
        out = synth_dataset(tmp_path)
        assert len(list(out.glob("*.pgm"))) == 40

    def test_single_object_single_angle(self, tmp_path):
        out = tmp_path / "one"
        assert run("synth", "--objects", "A", "--out", out, "--angles", "0") == 0
        assert [p.name for p in out.iterdir()] == ["A_0.pgm"]

    def test_rerun_byte_identical(self, tmp_path):
        a = synth_dataset(tmp_path / "a")
        b = synth_dataset(tmp_path / "b")
        assert file_hashes(a) == file_hashes(b)


class TestOcclude:
    def test_total_occlusion(self, tmp_path):
        out = synth_dataset(tmp_path, objects=["A"], angles=[0])
        src = out / "A_0.pgm"
        dst = tmp_path / "A_0_occ.pgm"
        assert run("occlude", src, dst, "--rect", "0,0,32,32", "--fill", "0") == 0
        img = eg.parse_pgm(dst.read_bytes())
        assert set(img.samples.tolist()) == {0}

    def test_outside_rectangle_fails(self, tmp_path):
        out = synth_dataset(tmp_path, objects=["A"], angles=[0])
        code = run("occlude", out / "A_0.pgm", tmp_path / "x.pgm",
                   "--rect", "40,40,4,4")
        assert code == 1

    def test_partial_occlusion_pixel_count(self, tmp_path):
        out = synth_dataset(tmp_path, objects=["A"], angles=[0])
        dst = tmp_path / "part.pgm"
        assert run("occlude", out / "A_0.pgm", dst, "--rect", "2,2,16,10",
                   "--fill", "0") == 0
        before = eg.parse_pgm((out / "A_0.pgm").read_bytes())
        after = eg.parse_pgm(dst.read_bytes())
        assert int((before.samples != after.samples).sum()) <= 160
        assert int((after.grid()[2:12, 2:18] == 0).sum()) == 160


class TestLearn:
    def test_model_has_point_lines(self, tmp_path, capsys):
        imgs = synth_dataset(tmp_path, objects=["A"])
        occ = imgs / "A_40_occ.pgm"
        assert run("occlude", imgs / "A_40.pgm", occ, "--rect", "2,2,16,10") == 0
        (imgs / "A_40.pgm").unlink()
        reg = learn_all(tmp_path, imgs, objects=["A"])
        text = (reg / "A.eig").read_text()
        assert text.startswith("EIGENGAZE 1\n")
        point_lines = [l for l in text.splitlines() if l.startswith("point ")]
        assert len(point_lines) == 10
        assert sum(l.split()[2] == "1" for l in point_lines) == 1
        assert "k = " in capsys.readouterr().out

    def test_single_view_centered_fails(self, tmp_path):
        imgs = synth_dataset(tmp_path, objects=["A"], angles=[0])
        code = run("learn", "--object", "A", "--registry", tmp_path / "reg",
                   imgs / "A_0.pgm")
        assert code == 1

    def test_repeated_learn_byte_identical(self, tmp_path):
        imgs = synth_dataset(tmp_path)
        reg_a = learn_all(tmp_path / "ra", imgs)
        reg_b = learn_all(tmp_path / "rb", imgs)
        assert file_hashes(reg_a) == file_hashes(reg_b)

    def test_learn_from_manifest(self, tmp_path):
        imgs = synth_dataset(tmp_path, objects=["A"])
        manifest = tmp_path / "train.tsv"
        lines = [
            f"{imgs / f'A_{a}.pgm'}\tA\t{a}\t0" for a in TRAIN_ANGLES
        ]
        manifest.write_text("\n".join(lines) + "\n")
        assert run("learn", "--object", "A", "--manifest", manifest,
                   "--registry", tmp_path / "reg") == 0
        assert (tmp_path / "reg" / "A.eig").exists()

    def test_env_var_registry(self, tmp_path, monkeypatch):
        imgs = synth_dataset(tmp_path, objects=["A"])
        monkeypatch.setenv("EIGENGAZE_REGISTRY", str(tmp_path / "envreg"))
        files = sorted(imgs.glob("A_*.pgm"))
        assert run("learn", "--object", "A", *files) == 0
        assert (tmp_path / "envreg" / "A.eig").exists()


class TestRecognize:
    def test_training_image_known(self, tmp_path, capsys):
        imgs = synth_dataset(tmp_path)
        reg = learn_all(tmp_path, imgs)
        capsys.readouterr()
        assert run("recognize", imgs / "mobile_20.pgm", "--registry", reg) == 0
        out = capsys.readouterr().out
        assert out.startswith("Known: mobile ")

    def test_heavy_occlusion_unknown(self, tmp_path, capsys):
        imgs = synth_dataset(tmp_path)
        reg = learn_all(tmp_path, imgs)
        heavy = tmp_path / "heavy.pgm"
        # 32x26 of 32x32 is 81% occluded
        assert run("occlude", imgs / "mobile_20.pgm", heavy,
                   "--rect", "0,0,32,26", "--fill", "0") == 0
        capsys.readouterr()
        assert run("recognize", heavy, "--registry", reg) == 2
        assert capsys.readouterr().out.startswith("Unknown:")

    def test_missing_registry(self, tmp_path):
        imgs = synth_dataset(tmp_path, objects=["A"], angles=[0])
        assert run("recognize", imgs / "A_0.pgm",
                   "--registry", tmp_path / "nope") == 1

    def test_explicit_threshold_override(self, tmp_path):
        imgs = synth_dataset(tmp_path)
        reg = learn_all(tmp_path, imgs)
        assert run("recognize", imgs / "mobile_20.pgm", "--registry", reg,
                   "--threshold", "1e-12") == 2


class TestEvaluate:
    def test_training_manifest_perfect(self, tmp_path, capsys):
        imgs = synth_dataset(tmp_path)
        reg = learn_all(tmp_path, imgs, extra=["--k", "10"])
        manifest = tmp_path / "q.tsv"
        lines = [
            f"{imgs / f'{obj}_{a}.pgm'}\t{obj}\t{a}\t0"
            for obj in OBJECTS
            for a in TRAIN_ANGLES
        ]
        manifest.write_text("\n".join(lines) + "\n")
        csv_out = tmp_path / "report.csv"
        assert run("evaluate", "--manifest", manifest, "--registry", reg,
                   "--csv", csv_out, "--text", tmp_path / "report.txt") == 0
        assert "r = 1.0000" in capsys.readouterr().out
        assert csv_out.read_text().splitlines()[0] == "true_id,predicted_id,count"
        assert (tmp_path / "report.txt").exists()

    def test_empty_manifest(self, tmp_path):
        imgs = synth_dataset(tmp_path)
        reg = learn_all(tmp_path, imgs)
        manifest = tmp_path / "empty.tsv"
        manifest.write_text("")
        assert run("evaluate", "--manifest", manifest, "--registry", reg) == 1

    def test_offset_queries_rate(self, tmp_path, capsys):
        imgs = synth_dataset(tmp_path)
        reg = learn_all(tmp_path, imgs)
        qdir = tmp_path / "queries"
        assert run("synth", "--objects", ",".join(OBJECTS), "--out", qdir,
                   "--angles", ",".join(str(a) for a in QUERY_ANGLES)) == 0
        manifest = tmp_path / "offset.tsv"
        lines = [
            f"{qdir / f'{obj}_{a}.pgm'}\t{obj}\t{a}\t0"
            for obj in OBJECTS
            for a in QUERY_ANGLES
        ]
        manifest.write_text("\n".join(lines) + "\n")
        assert run("evaluate", "--manifest", manifest, "--registry", reg) == 0
        out = capsys.readouterr().out
        rate = float(out.split("r = ")[1].split()[0])
        assert rate >= 0.90


class TestInspect:
    def test_csv_rows(self, tmp_path, capsys):
        imgs = synth_dataset(tmp_path)
        reg = learn_all(tmp_path, imgs)
        capsys.readouterr()
        assert run("inspect", reg / "mobile.eig", "--dims", "3") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "angle_deg,occluded,c1,c2,c3"
        assert len(lines) == 11

    def test_dims_too_large(self, tmp_path):
        imgs = synth_dataset(tmp_path)
        reg = learn_all(tmp_path, imgs)
        assert run("inspect", reg / "mobile.eig", "--dims", "99") == 1

    def test_out_file(self, tmp_path):
        imgs = synth_dataset(tmp_path)
        reg = learn_all(tmp_path, imgs)
        out = tmp_path / "coords.csv"
        assert run("inspect", reg / "mobile.eig", "--dims", "2", "--out", out) == 0
        assert out.read_text().startswith("angle_deg,occluded,c1,c2")
