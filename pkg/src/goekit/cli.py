"""Command line front door: assess, score, rank, fetch, serve.

Exit codes: 0 success, 1 operational failure (network, storage), 2 usage
or parse error. Settings resolve as environment variable, then flag,
then config file, then built-in default.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Optional

import click

from . import cvss, goe, nvd, store as store_mod

OUTPUT_SCHEMA_VERSION = 1

#: Environment variables recognized, mapped to config keys.
ENV_KEYS = {
    "GOE_STORE": "store",
    "GOE_FORMAT": "format",
    "GOE_NVD_API_KEY": "nvd_api_key",
    "GOE_NVD_BASE_URL": "nvd_base_url",
    "GOE_NVD_TTL_HOURS": "nvd_ttl_hours",
    "GOE_OFFLINE": "offline",
}

DEFAULTS = {
    "store": "store",
    "format": "human",
    "nvd_api_key": None,
    "nvd_base_url": nvd.DEFAULT_BASE_URL,
    "nvd_ttl_hours": "24",
    "offline": "0",
}


def read_config_file(path: Optional[Path]) -> dict[str, str]:
    """Parse a ``key = value`` config file; '#' starts a comment."""
    if path is None:
        return {}
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.ClickException(f"cannot read config file {path}: {exc}")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.UsageError(
                f"{path}:{lineno}: expected 'key = value', got {line!r}"
            )
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


@dataclass
class CliConfig:
    store: Path
    output_format: str
    nvd_api_key: Optional[str]
    nvd_base_url: str
    nvd_ttl: timedelta
    offline: bool

    @classmethod
    def resolve(
        cls,
        config_file: Optional[Path],
        flags: dict[str, Optional[str]],
        environ: Optional[dict[str, str]] = None,
    ) -> "CliConfig":
        environ = os.environ if environ is None else environ
        file_values = read_config_file(config_file)
        merged = dict(DEFAULTS)
        merged.update({k: v for k, v in file_values.items() if k in DEFAULTS})
        merged.update({k: v for k, v in flags.items() if v is not None})
        merged.update(
            {key: environ[var] for var, key in ENV_KEYS.items() if var in environ}
        )
        if merged["format"] not in ("human", "json"):
            raise click.UsageError(f"unknown output format {merged['format']!r}")
        try:
            ttl_hours = float(merged["nvd_ttl_hours"])
        except ValueError:
            raise click.UsageError(
                f"nvd_ttl_hours must be a number, got {merged['nvd_ttl_hours']!r}"
            )
        return cls(
            store=Path(merged["store"]),
            output_format=merged["format"],
            nvd_api_key=merged["nvd_api_key"] or None,
            nvd_base_url=merged["nvd_base_url"],
            nvd_ttl=timedelta(hours=ttl_hours),
            offline=str(merged["offline"]).lower() in ("1", "true", "yes", "on"),
        )

    def nvd_client(
        self, now: Optional[Callable[[], datetime]] = None
    ) -> nvd.NvdClient:
        extra = {} if now is None else {"now": now}
        return nvd.NvdClient(
            cache_dir=self.store / "nvdcache",
            api_key=self.nvd_api_key,
            base_url=self.nvd_base_url,
            ttl=self.nvd_ttl,
            offline=self.offline,
            **extra,
        )


def _emit_json(payload: dict) -> None:
    payload = {"schema_version": OUTPUT_SCHEMA_VERSION, **payload}
    click.echo(json.dumps(payload, indent=1, sort_keys=True))


def _severity_of(score: cvss.CvssScore) -> str:
    return f"{score.value} ({score.severity.value})"


@click.group()
@click.option(
    "--config",
    "config_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Config file (key = value lines).",
)
@click.option("--store", "store_flag", type=click.Path(path_type=Path))
@click.option(
    "--format",
    "format_flag",
    type=click.Choice(["human", "json"]),
    help="Output format.",
)
@click.option("--offline/--online", "offline_flag", default=None)
@click.pass_context
def main(
    ctx: click.Context,
    config_file: Optional[Path],
    store_flag: Optional[Path],
    format_flag: Optional[str],
    offline_flag: Optional[bool],
) -> None:
    """Kill-chain effort scoring, CVSS scoring and CVE ranking."""
    flags = {
        "store": str(store_flag) if store_flag else None,
        "format": format_flag,
        "offline": None if offline_flag is None else ("1" if offline_flag else "0"),
    }
    ctx.obj = CliConfig.resolve(config_file, flags)


# --- assess ---------------------------------------------------------------


def _transcript_tokens(path: Path) -> list[str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.ClickException(f"cannot read transcript {path}: {exc}")
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    for token in tokens:
        if token not in ("N", "H", "skip"):
            raise click.UsageError(
                f"transcript token {token!r} is not 'N', 'H' or 'skip'"
            )
    return tokens


class _TranscriptDriver:
    """Feeds pre-recorded answers to the traversal."""

    def __init__(self, tokens: list[str]) -> None:
        self.tokens = tokens
        self.position = 0

    def next_token(self, step: goe.KillChainStep, criterion: goe.Criterion) -> str:
        if self.position >= len(self.tokens):
            raise click.UsageError(
                f"transcript exhausted at step {step.value} "
                f"awaiting {criterion.value}"
            )
        token = self.tokens[self.position]
        self.position += 1
        return token

    def rationale(self, criterion: goe.Criterion) -> str:
        return ""


class _InteractiveDriver:
    """Prompts on the terminal."""

    def next_token(self, step: goe.KillChainStep, criterion: goe.Criterion) -> str:
        click.echo(f"  [{criterion.value}] {goe.DEFAULT_PROMPTS[criterion]}")
        choice = click.prompt(
            "  answer",
            type=click.Choice(["N", "H", "skip"], case_sensitive=False),
            show_choices=True,
        )
        return "skip" if choice.lower() == "skip" else choice.upper()

    def rationale(self, criterion: goe.Criterion) -> str:
        return click.prompt("  rationale", default="", show_default=False)


def _walk_steps(driver) -> list[goe.StepAssessment]:
    interactive = isinstance(driver, _InteractiveDriver)
    steps = []
    for step in goe.KillChainStep:
        if interactive:
            click.echo(f"Step {step.value}: {step.name.title()}")
        state = goe.begin_step(step)
        rationale: dict[goe.Criterion, str] = {}
        skipped = False
        while state.awaiting is not None:
            criterion = state.awaiting
            token = driver.next_token(step, criterion)
            if token == "skip":
                skipped = True
                break
            state = state.answer(goe.Answer(token))
            note = driver.rationale(criterion)
            if note:
                rationale[criterion] = note
        if skipped:
            steps.append(goe.StepAssessment(step, None))
        else:
            steps.append(goe.StepAssessment(step, state.leaf, rationale))
    return steps


def _print_assessment(
    record: store_mod.AssessmentRecord, config: CliConfig, revision: int
) -> None:
    assessment = record.assessment
    if config.output_format == "json":
        _emit_json({"record": store_mod.record_to_json(record), "revision": revision})
        return
    click.echo(f"CVE:      {record.cve_id}")
    for step_assessment in assessment.steps:
        sub = step_assessment.sub_vector
        body = "skipped" if sub is None else f"{sub}  score {sub.score}"
        click.echo(f"  {step_assessment.step.name.title():<15} {body}")
    overall = record.overall
    click.echo(f"Overall:  {'Undefined' if overall is None else overall}")
    click.echo(f"String:   {goe.serialize_goe(assessment)}")
    for version, score in record.cvss_scores:
        click.echo(f"CVSS {version}: {_severity_of(score)}")
    if overall is None:
        click.echo("warning: all steps skipped, overall score is Undefined", err=True)
    click.echo(f"Saved revision {revision}")


@main.command()
@click.argument("cve_id")
@click.option("--analyst", default="", help="Analyst name stored on the record.")
@click.option(
    "--answers",
    "answers_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Transcript file of N/H/skip tokens instead of prompting.",
)
@click.option(
    "--fixture",
    "fixture_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Import an NVD-shaped fixture before resolving the CVE.",
)
@click.option("--now", "now_text", help="Fixed ISO-8601 timestamp (for replay).")
@click.pass_obj
def assess(
    config: CliConfig,
    cve_id: str,
    analyst: str,
    answers_file: Optional[Path],
    fixture_file: Optional[Path],
    now_text: Optional[str],
) -> None:
    """Walk the four kill-chain steps for one CVE and save the record."""
    try:
        cve_id = nvd.canonical_cve_id(cve_id)
    except nvd.InvalidId as exc:
        raise click.UsageError(str(exc))
    if now_text is not None:
        try:
            fixed_now = datetime.fromisoformat(now_text)
        except ValueError as exc:
            raise click.UsageError(f"bad --now timestamp: {exc}")
        clock: Callable[[], datetime] = lambda: fixed_now
    else:
        clock = lambda: datetime.now(timezone.utc)

    client = config.nvd_client(now=clock)
    try:
        if fixture_file is not None:
            client.load_fixture(fixture_file)
        cve = client.fetch_cve(cve_id)
    except nvd.NvdError as exc:
        raise click.ClickException(str(exc))

    if answers_file is not None:
        driver = _TranscriptDriver(_transcript_tokens(answers_file))
    else:
        if not sys.stdin.isatty():
            raise click.UsageError(
                "no tty for interactive mode; use --answers <file>"
            )
        click.echo(f"Assessing {cve.cve_id}: {cve.description[:100]}")
        driver = _InteractiveDriver()

    try:
        steps = _walk_steps(driver)
    except (click.Abort, EOFError):
        raise click.ClickException("assessment aborted, nothing saved")

    stamp = clock()
    assessment = goe.GoeAssessment(
        cve_id=cve.cve_id,
        steps=tuple(steps),
        analyst=analyst,
        created_at=stamp,
        updated_at=stamp,
    )
    scores = []
    for version, text in cve.cvss_vectors:
        try:
            scores.append((version, cvss.score(text)))
        except cvss.CvssError:
            continue
    record = store_mod.AssessmentRecord(
        assessment=assessment,
        overall=goe.overall_goe(assessment),
        cve=cve,
        cvss_scores=tuple(scores),
    )
    try:
        revision = store_mod.AssessmentStore(config.store).save(record)
    except store_mod.StoreError as exc:
        raise click.ClickException(str(exc))
    _print_assessment(record, config, revision)


# --- score ----------------------------------------------------------------


@main.command()
@click.argument("goe_string")
@click.argument("cvss_strings", nargs=-1)
@click.pass_obj
def score(config: CliConfig, goe_string: str, cvss_strings: tuple[str, ...]) -> None:
    """Score an assessment string plus optional CVSS vectors."""
    try:
        assessment = goe.parse_goe(goe_string)
    except goe.GoeSyntaxError as exc:
        raise click.UsageError(f"bad assessment string: {exc}")
    cvss_results = []
    for text in cvss_strings:
        try:
            parsed = cvss.parse_cvss(text)
            cvss_results.append((parsed.VERSION, text, cvss.score(text)))
        except cvss.CvssError as exc:
            raise click.UsageError(f"bad CVSS vector {text!r}: {exc}")
    overall = goe.overall_goe(assessment)

    if config.output_format == "json":
        _emit_json(
            {
                "goe": {
                    "string": goe.serialize_goe(assessment),
                    "steps": [
                        {
                            "step": s.step.name.title(),
                            "score": s.score,
                            "skipped": s.skipped,
                        }
                        for s in assessment.steps
                    ],
                    "overall": overall,
                },
                "cvss": [
                    {
                        "version": version,
                        "vector": text,
                        "score": result.value,
                        "severity": result.severity.value,
                    }
                    for version, text, result in cvss_results
                ],
            }
        )
        return
    for step_assessment in assessment.steps:
        value = "skipped" if step_assessment.skipped else step_assessment.score
        click.echo(f"  {step_assessment.step.name.title():<15} {value}")
    click.echo(f"Overall:  {'Undefined' if overall is None else overall}")
    for version, text, result in cvss_results:
        click.echo(f"CVSS {version}: {_severity_of(result)}")


# --- rank -----------------------------------------------------------------


@main.command()
@click.option(
    "--input",
    "report_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Rank a previously exported report instead of the store.",
)
@click.pass_obj
def rank(config: CliConfig, report_file: Optional[Path]) -> None:
    """Print the remediation priority order."""
    warnings = 0
    if report_file is not None:
        try:
            report = json.loads(Path(report_file).read_text())
            records = [
                store_mod.record_from_json(item) for item in report.get("records", [])
            ]
        except (OSError, json.JSONDecodeError, store_mod.StoreError) as exc:
            raise click.ClickException(f"cannot read report {report_file}: {exc}")
        warnings = int(report.get("warnings", 0))
    else:
        storage = store_mod.AssessmentStore(config.store)
        try:
            records = storage.query(skip_errors=True)
        except store_mod.StoreError as exc:
            raise click.ClickException(str(exc))
        warnings = storage.warnings
    entries = store_mod.rank(records)

    if config.output_format == "json":
        _emit_json(
            {
                "ranking": [
                    {
                        "rank": e.rank,
                        "cve_id": e.cve_id,
                        "goe": e.goe,
                        "cvss": e.cvss,
                    }
                    for e in entries
                ],
                "warnings": warnings,
            }
        )
        return
    click.echo(f"{'rank':<6}{'cve':<18}{'goe':<11}cvss")
    for entry in entries:
        goe_text = "Undefined" if entry.goe is None else str(entry.goe)
        cvss_text = "-" if entry.cvss is None else f"{entry.cvss}"
        click.echo(f"{entry.rank:<6}{entry.cve_id:<18}{goe_text:<11}{cvss_text}")
    if warnings:
        click.echo(f"warning: skipped {warnings} unreadable record(s)", err=True)


# --- fetch ----------------------------------------------------------------


@main.command()
@click.argument("cve_id")
@click.option("--refresh", is_flag=True, help="Bypass the cache.")
@click.option(
    "--fixture",
    "fixture_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Import an NVD-shaped fixture before fetching.",
)
@click.pass_obj
def fetch(
    config: CliConfig,
    cve_id: str,
    refresh: bool,
    fixture_file: Optional[Path],
) -> None:
    """Fetch one CVE record (cache, fixture or live NVD)."""
    try:
        cve_id = nvd.canonical_cve_id(cve_id)
    except nvd.InvalidId as exc:
        raise click.UsageError(str(exc))
    client = config.nvd_client()
    was_cached = (client.cache_dir / f"{cve_id}.json").exists() and not refresh
    try:
        if fixture_file is not None:
            client.load_fixture(fixture_file)
            was_cached = False
        record = client.fetch_cve(cve_id, refresh=refresh)
    except nvd.NvdError as exc:
        raise click.ClickException(str(exc))

    scores = []
    for version, text in record.cvss_vectors:
        try:
            scores.append((version, text, cvss.score(text)))
        except cvss.CvssError:
            continue
    if config.output_format == "json":
        _emit_json(
            {
                "cve": {
                    "cve_id": record.cve_id,
                    "description": record.description,
                    "references": list(record.references),
                    "cvss_vectors": [list(p) for p in record.cvss_vectors],
                    "source": record.source.value,
                    "fetched_at": record.fetched_at.isoformat()
                    if record.fetched_at
                    else None,
                },
                "cached": was_cached,
            }
        )
        return
    marker = " (cached)" if was_cached else ""
    click.echo(f"{record.cve_id}{marker} [{record.source.value}]")
    click.echo(record.description)
    for version, text, result in scores:
        click.echo(f"CVSS {version}: {_severity_of(result)}  {text}")
    for url in record.references:
        click.echo(f"ref: {url}")


# --- serve ----------------------------------------------------------------


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option(
    "--static",
    "static_dir",
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory of built UI assets to serve at /.",
)
@click.pass_obj
def serve(config: CliConfig, host: str, port: int, static_dir: Optional[Path]) -> None:
    """Run the HTTP API (and optionally the workbench UI)."""
    import uvicorn

    from .service import ServiceConfig, create_app

    app = create_app(
        ServiceConfig(
            store_path=config.store,
            nvd_api_key=config.nvd_api_key,
            nvd_base_url=config.nvd_base_url,
            offline=config.offline,
            static_dir=static_dir,
        )
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
