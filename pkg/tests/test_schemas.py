import json
import math

import pydantic
import pytest

from dada.core.errors import ArtifactError, DataError, ValidationError
from dada.schemas.config import LambdaPlacement, Objective, SupervisionSignal, TrainConfig
from dada.schemas.manifest import RunManifest
from dada.schemas.metrics import (
    MetricsRecord, Phase, component_metric_name, format_metrics_log, is_known_metric, parse_metrics_log,
)
from dada.schemas.sweep import DatasetSpec, SweepSpec


def test_config_defaults():
    config = TrainConfig()
    assert config.objective == Objective.DADA
    assert (config.eta0, config.alpha, config.beta, config.gamma) == (1e-4, 10.0, 0.75, 10.0)
    assert (config.momentum, config.weight_decay, config.batch_size) == (0.9, 5e-4, 64)
    assert config.lambda_placement == LambdaPlacement.JOINT
    assert config.condition_threshold == 0.5
    assert config.supervision == SupervisionSignal.FULL
    assert TrainConfig.parse({"supervision": "bar"}).supervision == SupervisionSignal.BAR


def test_config_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# 注释\n"
        "objective = dada_p\n"
        "eta0 = 0.01\n"
        "hidden_dims = 16, 8\n"
        "category_lambda =\n"
        "keep_supervision = false\n",
        encoding="utf-8",
    )
    config = TrainConfig.from_file(path)
    assert config.objective == Objective.DADA_P
    assert config.eta0 == 0.01
    assert config.hidden_dims == [16, 8]
    assert config.category_lambda is None
    assert config.keep_supervision is False


def test_config_text_reloads(tmp_path):
    config = TrainConfig.parse({"objective": "dada_o", "q": 0.2, "hidden_dims": [4, 4], "pretrain_lr": 0.5})
    path = tmp_path / "snapshot.cfg"
    path.write_text(config.to_text(), encoding="utf-8")
    assert TrainConfig.from_file(path) == config


@pytest.mark.parametrize("values, problem", [
    ({"eta0": 0}, "eta0"),
    ({"q": 0.5}, "q"),
    ({"batch_size": 0}, "batch_size"),
    ({"T_adv": 0}, "T_adv"),
    ({"learning_rate": 0.1}, "learning_rate"),
    ({"objective": "dann"}, "objective"),
    ({"hidden_dims": ""}, "hidden_dims"),
    ({"supervision": "soft"}, "supervision"),
])
def test_config_rejects_bad_values(values, problem):
    with pytest.raises(ValidationError, match=problem):
        TrainConfig.parse(values)


def test_config_file_missing(tmp_path):
    with pytest.raises(ArtifactError):
        TrainConfig.from_file(tmp_path / "absent.cfg")


def test_epoch_totals():
    config = TrainConfig.parse({"pretrain_epochs": 3, "T_cls": 2, "T_adv": 5, "N_alter": 4, "alternation": True})
    assert config.total_classification_epochs() == 8
    assert config.total_adversarial_epochs() == 20
    assert config.total_epochs() == 31
    assert TrainConfig.parse({"pretrain_epochs": 3, "T_adv": 5}).total_epochs() == 8


def test_metric_vocabulary():
    assert is_known_metric("acc_target")
    assert is_known_metric("loss_t_F")
    assert not is_known_metric("loss_")
    assert not is_known_metric("accuracy")
    assert component_metric_name("L_em") == "loss_em"
    with pytest.raises(pydantic.ValidationError):
        MetricsRecord(step=0, epoch=0, phase=Phase.ADV, name="accuracy", value=1.0)


def test_metrics_line_keeps_full_precision():
    record = MetricsRecord(step=12, epoch=3, phase=Phase.ADV, name="loss_s", value=0.1 + 0.2)
    assert record.to_line() == "12,3,adv,loss_s,0.30000000000000004"
    assert MetricsRecord.from_line(record.to_line()) == record


def test_metrics_log_parsing():
    text = "0,1,pretrain,acc_source,0.5\n\n4,2,adv,acc_target,nan\n"
    records = parse_metrics_log(text)
    assert [record.phase for record in records] == [Phase.PRETRAIN, Phase.ADV]
    assert math.isnan(records[1].value)
    assert format_metrics_log(records[:1]) == "0,1,pretrain,acc_source,0.5\n"


@pytest.mark.parametrize("line", ["1,2,adv,acc_target", "x,2,adv,acc_target,0.1", "1,2,train,acc_target,0.1"])
def test_malformed_metrics_line(line):
    with pytest.raises(DataError) as excinfo:
        parse_metrics_log("0,0,adv,acc_target,1.0\n" + line + "\n")
    assert excinfo.value.line == 2


def test_manifest_round_trip(tmp_path):
    manifest = RunManifest(
        config=TrainConfig().snapshot(), dataset_fingerprint="ab" * 32, data_path="/data/moons", seed=0,
        final_metrics={"acc_target": 0.9},
    )
    path = manifest.write(tmp_path / "run" / "manifest.json")
    assert RunManifest.read(path) == manifest
    assert json.loads(path.read_text(encoding="utf-8"))["artifacts"]["checkpoint"] == "checkpoint.npz"


def test_manifest_errors(tmp_path):
    with pytest.raises(ArtifactError):
        RunManifest.read(tmp_path / "absent.json")
    (tmp_path / "bad.json").write_text('{"seed": 0}', encoding="utf-8")
    with pytest.raises(ValidationError):
        RunManifest.read(tmp_path / "bad.json")


def test_dataset_spec_selection():
    assert DatasetSpec(kind="grid", target_classes=2).target_selection() == [1, 2]
    assert DatasetSpec(kind="grid", restrict_source=[1, 3]).source_selection() == [1, 3]
    assert DatasetSpec().target_selection() is None
    with pytest.raises(pydantic.ValidationError):
        DatasetSpec(shift=[1.0])


def test_sweep_spec_read(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({"knob": {"name": "q", "values": [0.1, 0.2]}}), encoding="utf-8")
    spec = SweepSpec.read(path)
    assert spec.seeds == [0, 1, 2, 3, 4]
    assert spec.metrics == ["acc_target"]

    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValidationError, match="not valid JSON"):
        SweepSpec.read(path)
    with pytest.raises(ArtifactError):
        SweepSpec.read(tmp_path / "absent.json")


def test_sweep_knob_must_exist():
    spec = SweepSpec.model_validate({"knob": {"target": "dataset", "name": "radius", "values": [1]}})
    with pytest.raises(ValidationError, match="radius"):
        spec.check_knob()
