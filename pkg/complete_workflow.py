# Complete TMUML workflow: use case + class model -> static TM model -> events -> behavior -> trace -> diagrams
# Every intermediate is written to the output directory so each stage can be inspected on its own

import os
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

import console
from behavior_model import (
    check_method_paths,
    check_reachability,
    default_start,
    format_occurrences,
    format_trace,
    recognize_methods,
    simulate,
)
from dot_generator import VIEWS, RenderView, emit_dot
from event_regions import validate_regions
from events_file import parse_events
from tm_errors import ConfigError, ParseError
from tm_format import print_tm
from tm_model import ValidationReport
from tm_validator import validate_static
from tmuml_transformer import build_static_model, parse_bindings
from uml_parser import parse_class, parse_usecase

DEFAULT_SEED = 7
DEFAULT_MAX_STEPS = 1000
DEFAULT_OUT_DIR = "tmuml_output"


def env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, found '{raw}'")


def env_defaults() -> Tuple[int, int, str]:
    """Seed, step limit and output directory from the environment (.env is loaded first)"""
    load_dotenv()
    return (
        env_int("TMUML_SEED", DEFAULT_SEED),
        env_int("TMUML_MAX_STEPS", DEFAULT_MAX_STEPS),
        os.getenv("TMUML_OUT_DIR") or DEFAULT_OUT_DIR,
    )


class PipelineConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    usecase_path: Path = Field(..., description="Use-case model file")
    class_path: Path = Field(..., description="Class model file")
    binding_path: Path = Field(..., description="Binding map file (bind/alias/op/assign/@decreate)")
    events_path: Path = Field(..., description="Events file: regions, behavior edges, method paths")
    out_dir: Path = Field(Path(DEFAULT_OUT_DIR), description="Directory receiving every artifact")
    seed: int = Field(DEFAULT_SEED, ge=0, description="Simulation seed")
    max_steps: int = Field(DEFAULT_MAX_STEPS, ge=0, description="Simulation step limit")
    start: Tuple[str, ...] = Field((), description="Start events; empty means events without predecessors")

    @model_validator(mode="after")
    def _inputs_exist(self) -> "PipelineConfig":
        missing = [
            str(path)
            for path in (self.usecase_path, self.class_path, self.binding_path, self.events_path)
            if not path.is_file()
        ]
        if missing:
            raise ValueError(f"input files not found: {', '.join(missing)}")
        return self

    @classmethod
    def load(
        cls,
        usecase_path: str,
        class_path: str,
        binding_path: str,
        events_path: str,
        out_dir: Optional[str] = None,
        seed: Optional[int] = None,
        max_steps: Optional[int] = None,
        start: Sequence[str] = (),
    ) -> "PipelineConfig":
        """Explicit values win over TMUML_* environment variables"""
        env_seed, env_steps, env_out = env_defaults()
        try:
            return cls(
                usecase_path=usecase_path,
                class_path=class_path,
                binding_path=binding_path,
                events_path=events_path,
                out_dir=out_dir or env_out,
                seed=env_seed if seed is None else seed,
                max_steps=env_steps if max_steps is None else max_steps,
                start=tuple(start),
            )
        except ValidationError as exc:
            problems = "; ".join(error["msg"] for error in exc.errors())
            raise ConfigError(f"invalid pipeline configuration: {problems}") from exc


class PipelineResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    exit_code: int
    artifacts: Tuple[str, ...] = ()
    failed_stage: Optional[str] = None


class TmumlWorkflow:
    """Runs the stages in order and stops at the first report with errors"""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.artifacts: List[str] = []

    def write(self, name: str, text: str) -> None:
        path = self.config.out_dir / name
        path.write_text(text, encoding="utf-8", newline="\n")
        self.artifacts.append(str(path))
        console.artifact(str(path))

    def report(self, name: str, stage: str, report: ValidationReport) -> bool:
        self.write(name, report.to_text())
        if report.has_errors:
            console.failure(f"{stage}: {len(report.errors)} error(s)")
            return False
        if report.warnings:
            console.warning(f"{stage}: {len(report.warnings)} warning(s)")
        else:
            console.success(f"{stage}: no findings")
        return True

    def stop(self, stage: str) -> PipelineResult:
        console.failure(f"Workflow stopped at {stage}")
        return PipelineResult(exit_code=1, artifacts=tuple(self.artifacts), failed_stage=stage)

    def run(self) -> PipelineResult:
        config = self.config
        console.banner("TMUML WORKFLOW: UML -> TM STATIC MODEL -> EVENTS -> BEHAVIOR")
        try:
            config.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {config.out_dir}: {exc.strerror or exc}")

        console.step("Step 1: transforming use cases and classes into one static model...")
        usecase = parse_usecase(read(config.usecase_path), str(config.usecase_path))
        classes = parse_class(read(config.class_path), str(config.class_path))
        bindings = parse_bindings(read(config.binding_path), str(config.binding_path))
        model = build_static_model(usecase, classes, bindings)
        console.success(f"{len(model.machines)} machines, {len(model.flows)} flows, {len(model.triggers)} triggers")
        self.write("model.tm", print_tm(model))
        if not self.report("static.report", "Static model", validate_static(model)):
            return self.stop("static")

        console.step("Step 2: overlaying event regions...")
        events, behavior = parse_events(read(config.events_path), model, str(config.events_path))
        if not self.report("events.report", "Event regions", validate_regions(model, events)):
            return self.stop("events")

        console.step("Step 3: checking the behavior graph and method paths...")
        start = list(config.start) or default_start(behavior)
        behavior_report = check_method_paths(behavior).merge(check_reachability(behavior, start))
        if not self.report("behavior.report", "Behavior graph", behavior_report):
            return self.stop("behavior")

        console.step(f"Step 4: simulating (seed {config.seed}, at most {config.max_steps} steps)...")
        trace = simulate(behavior, start, config.seed, config.max_steps)
        self.write("trace.txt", format_trace(trace))
        occurrences = recognize_methods(behavior, trace)
        self.write("methods.txt", format_occurrences(occurrences))
        console.success(f"{len(trace.steps)} events, {len(occurrences)} method occurrence(s)")

        console.step("Step 5: rendering diagrams...")
        for view in VIEWS:
            self.write(f"{view}.dot", emit_dot(model, events, behavior, RenderView(view=view)))

        console.success(f"Workflow finished, {len(self.artifacts)} artifacts in {config.out_dir}")
        return PipelineResult(exit_code=0, artifacts=tuple(self.artifacts))


def read(path: Union[str, Path]) -> str:
    """UTF-8 text of an input file; undecodable bytes are a parse error at their position"""
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        before = exc.object[: exc.start]
        line = before.count(b"\n") + 1
        column = exc.start - (before.rfind(b"\n") + 1) + 1
        raise ParseError(f"not valid UTF-8 (byte 0x{exc.object[exc.start]:02x})", line, column, str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}")


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    return TmumlWorkflow(config).run()
