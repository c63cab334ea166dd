import json

import pytest

import feigenjulia as fj
from feigenjulia import cli, reports, types
from tests.unit import factories


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    monkeypatch.delenv("FEIGENJULIA_OUTPUT_DIR", raising=False)
    return tmp_path / "runs"


def test_help_exits_cleanly(capsys):
    assert cli.run_command(["--help"]) == cli.EXIT_OK
    assert "certify-delta" in capsys.readouterr().out


def test_unknown_command_is_a_usage_error(capsys):
    assert cli.run_command(["transcribe"]) == cli.EXIT_USAGE
    assert "feigenjulia:" in capsys.readouterr().err


def test_out_of_range_flag_is_a_usage_error(output_dir, capsys):
    code = cli.run_command(["certify-delta", "--delta", "0.9", "--output-dir", str(output_dir)])

    assert code == cli.EXIT_USAGE
    assert "delta" in capsys.readouterr().err
    assert not output_dir.exists()


def test_find_param(output_dir):
    code = cli.run_command(["find-param", "--period", "3", "--output-dir", str(output_dir)])

    assert code == cli.EXIT_OK
    report = reports.read_report(output_dir / "find-param" / "parameter.json", types.ParameterReport)
    assert report.period == 3
    assert report.word == "RL"
    assert report.c == pytest.approx(1.754877666, abs=1e-8)

    manifest = reports.read_report(output_dir / "find-param" / "manifest.json", types.Manifest)
    assert manifest.command == "find-param"
    assert manifest.exit_code == cli.EXIT_OK
    assert manifest.artifacts == ["parameter.json"]
    assert manifest.config["period"] == 3


def test_flags_override_config_file(output_dir, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("period = 4\n")

    code = cli.run_command(["find-param", "--config", str(config), "--period", "3", "--output-dir", str(output_dir)])

    assert code == cli.EXIT_OK
    data = json.loads((output_dir / "find-param" / "parameter.json").read_text())
    assert data["period"] == 3


def test_config_file_output_dir(tmp_path, monkeypatch):
    monkeypatch.delenv("FEIGENJULIA_OUTPUT_DIR", raising=False)
    config = tmp_path / "run.cfg"
    config.write_text(f"period = 3\noutput_dir = {tmp_path / 'from-file'}\n")

    assert cli.run_command(["find-param", "--config", str(config)]) == cli.EXIT_OK
    assert (tmp_path / "from-file" / "find-param" / "parameter.json").exists()


def test_environment_output_dir_beats_config_file(tmp_path, monkeypatch):
    monkeypatch.setenv("FEIGENJULIA_OUTPUT_DIR", str(tmp_path / "from-env"))
    config = tmp_path / "run.cfg"
    config.write_text(f"period = 3\noutput_dir = {tmp_path / 'from-file'}\n")

    assert cli.run_command(["find-param", "--config", str(config)]) == cli.EXIT_OK
    assert (tmp_path / "from-env" / "find-param" / "parameter.json").exists()
    assert not (tmp_path / "from-file").exists()


def test_bad_config_file_is_a_usage_error(output_dir, tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("period = 3\nnonsense\n")

    code = cli.run_command(["find-param", "--config", str(config), "--output-dir", str(output_dir)])

    assert code == cli.EXIT_USAGE
    assert ":2:" in capsys.readouterr().err


def test_certify_delta_certified(output_dir, mocker):
    certificate = factories.DeltaCertificateFactory()
    certify = mocker.patch.object(cli.Certifier, "certify_delta", return_value=certificate)

    code = cli.run_command(["certify-delta", "--period", "6", "--delta", "1.8", "--output-dir", str(output_dir)])

    assert code == cli.EXIT_OK
    certify.assert_called_once_with(6, 0.05, 1.8, mode=fj.RecursionMode.direct)
    run_dir = output_dir / "certify-delta"
    assert reports.read_report(run_dir / "certificate.json", types.DeltaCertificate) == certificate
    assert "status: certified" in (run_dir / "summary.txt").read_text()
    manifest = reports.read_report(run_dir / "manifest.json", types.Manifest)
    assert manifest.artifacts == ["certificate.json", "summary.txt"]


def test_certify_delta_failed(output_dir, mocker):
    certificate = factories.DeltaCertificateFactory(
        status=fj.CertificateStatus.no_fixed_point,
        fixed_point=None,
        error="beta exceeds the quadratic threshold",
    )
    mocker.patch.object(cli.Certifier, "certify_delta", return_value=certificate)

    code = cli.run_command(["certify-delta", "--output-dir", str(output_dir)])

    assert code == cli.EXIT_FAILED
    summary = (output_dir / "certify-delta" / "summary.txt").read_text()
    assert "no_fixed_point" in summary
    assert "error: beta exceeds" in summary


def test_uncertifiable_range_exits_failed(output_dir, mocker):
    mocker.patch.object(
        cli.Certifier,
        "bisect_delta",
        side_effect=fj.CertificateError("delta_max fails", fj.ErrorCode.uncertifiable_range),
    )

    code = cli.run_command(["certify-delta", "--bisect", "true", "--output-dir", str(output_dir)])

    assert code == cli.EXIT_FAILED
    assert "delta_max fails" in (output_dir / "certify-delta" / "summary.txt").read_text()


def test_library_errors_are_recorded_in_the_manifest(output_dir, mocker, capsys):
    mocker.patch.object(
        cli.Certifier,
        "certify_delta",
        side_effect=fj.RegionError("nesting fails at level 1", fj.ErrorCode.nesting_violation),
    )

    code = cli.run_command(["certify-delta", "--output-dir", str(output_dir)])

    assert code == cli.EXIT_CRASH
    manifest = reports.read_report(output_dir / "certify-delta" / "manifest.json", types.Manifest)
    assert manifest.exit_code == cli.EXIT_CRASH
    assert manifest.error == "nesting fails at level 1"
    assert "nesting fails" in capsys.readouterr().err


def test_global_settings_are_restored(output_dir):
    before = fj.settings

    cli.run_command(["find-param", "--period", "3", "--threads", "1", "--output-dir", str(output_dir)])

    assert fj.settings is before


def test_schemas_command_writes_one_schema_per_record(output_dir):
    code = cli.run_command(["schemas", "--output-dir", str(output_dir)])

    assert code == cli.EXIT_OK
    directory = output_dir / "schemas"
    schema = json.loads((directory / "DeltaCertificate.json").read_text())
    assert {"alpha", "beta", "gamma", "inputs"} <= set(schema["properties"])
    manifest = reports.read_report(directory / "manifest.json", types.Manifest)
    assert manifest.command == "schemas"
    assert sorted(manifest.artifacts) == sorted(f"{model.__name__}.json" for model in reports.SCHEMA_RECORDS)
