# TMUML command line: parse, transform, validate, events, behavior, simulate, recognize, render, pipeline, diff
# Reports go to stdout, status lines to stderr
# Exit codes: 0 ok, 1 error findings or semantic error, 2 unreadable input, 3 usage or configuration error

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import console
from behavior_model import (
    BehaviorGraph,
    check_method_paths,
    check_reachability,
    default_start,
    format_occurrences,
    format_trace,
    parse_trace,
    recognize_methods,
    simulate,
)
from complete_workflow import PipelineConfig, env_defaults, read, run_pipeline
from dot_generator import VIEWS, RenderView, emit_dot
from event_regions import EventDef, validate_regions
from events_file import parse_events, print_events
from tm_diff import structural_diff
from tm_errors import ConfigError, ParseError, TmumlError
from tm_format import parse_tm, print_tm
from tm_model import StaticModel, ValidationReport
from tm_validator import validate_static
from tmuml_transformer import (
    BindingMap,
    merge_models,
    parse_bindings,
    serialize_bindings,
    transform_class,
    transform_usecase,
)
from uml_parser import parse_class, parse_usecase, serialize_uml

KINDS = {".tm": "tm", ".usecase": "usecase", ".class": "class", ".events": "events", ".bind": "bind"}

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_PARSE = 2
EXIT_USAGE = 3


class UsageParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; usage problems here are exit 3"""

    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


def emit(text: str, output: Optional[str] = None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8", newline="\n")
        console.artifact(output)
    else:
        sys.stdout.write(text)


def load_model(path: str) -> StaticModel:
    return parse_tm(read(path), path)


def load_events(tm_path: str, events_path: str) -> Tuple[StaticModel, List[EventDef], BehaviorGraph]:
    model = load_model(tm_path)
    events, behavior = parse_events(read(events_path), model, events_path)
    return model, events, behavior


def finish(report: ValidationReport, what: str) -> int:
    sys.stdout.write(report.to_text())
    if report.has_errors:
        console.failure(f"{what}: {len(report.errors)} error(s), {len(report.warnings)} warning(s)")
        return EXIT_FINDINGS
    console.success(f"{what}: {len(report.warnings)} warning(s)")
    return EXIT_OK


def cmd_parse(args) -> int:
    kind = args.kind or KINDS.get(Path(args.file).suffix)
    if kind is None:
        raise ConfigError(f"cannot infer the kind of {args.file}; pass --kind")
    text = read(args.file)
    if kind == "tm":
        emit(print_tm(parse_tm(text, args.file)))
    elif kind in ("usecase", "class"):
        parsed = parse_usecase(text, args.file) if kind == "usecase" else parse_class(text, args.file)
        emit(serialize_uml(parsed))
    elif kind == "bind":
        emit(serialize_bindings(parse_bindings(text, args.file)))
    else:
        if not args.tm:
            raise ConfigError("echoing an events file needs --tm <model>")
        _, _, behavior = load_events(args.tm, args.file)
        emit(print_events(behavior))
    console.success(f"Parsed {args.file} as {kind}")
    return EXIT_OK


def cmd_transform(args) -> int:
    skeleton = transform_usecase(parse_usecase(read(args.usecase), args.usecase))
    if args.class_file:
        bindings = parse_bindings(read(args.bind), args.bind) if args.bind else BindingMap()
        classes = parse_class(read(args.class_file), args.class_file)
        fragments = transform_class(classes, bindings.decreate_operations)
        model = merge_models(skeleton, fragments, bindings, classes)
    else:
        model = skeleton
    emit(print_tm(model), args.output)
    console.success(f"Static model: {len(model.machines)} machines, {len(model.flows)} flows, {len(model.triggers)} triggers")
    return EXIT_OK


def cmd_validate(args) -> int:
    return finish(validate_static(load_model(args.tm)), "Static model")


def cmd_events(args) -> int:
    model, events, _ = load_events(args.tm, args.events)
    console.step(f"{len(events)} events loaded")
    return finish(validate_regions(model, events), "Event regions")


def cmd_behavior(args) -> int:
    _, _, behavior = load_events(args.tm, args.events)
    start = args.start or default_start(behavior)
    return finish(check_method_paths(behavior).merge(check_reachability(behavior, start)), "Behavior graph")


def cmd_simulate(args) -> int:
    _, _, behavior = load_events(args.tm, args.events)
    env_seed, env_steps, _ = env_defaults()
    seed = env_seed if args.seed is None else args.seed
    steps = env_steps if args.steps is None else args.steps
    if seed < 0 or steps < 0:
        raise ConfigError("--seed and --steps must be non-negative")
    trace = simulate(behavior, args.start or default_start(behavior), seed, steps)
    emit(format_trace(trace), args.output)
    console.success(f"Trace of {len(trace.steps)} events (seed {seed})")
    return EXIT_OK


def cmd_recognize(args) -> int:
    _, _, behavior = load_events(args.tm, args.events)
    trace = parse_trace(read(args.trace), args.trace)
    occurrences = recognize_methods(behavior, trace)
    emit(format_occurrences(occurrences))
    console.success(f"{len(occurrences)} method occurrence(s)")
    return EXIT_OK


def cmd_render(args) -> int:
    view = RenderView(view=args.view, show_storage=not args.no_storage, condition_labels=not args.no_conditions)
    model = load_model(args.tm)
    events, behavior = None, None
    if args.events:
        events, behavior = parse_events(read(args.events), model, args.events)
    emit(emit_dot(model, events, behavior, view), args.output)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config = PipelineConfig.load(
        usecase_path=args.usecase,
        class_path=args.class_file,
        binding_path=args.bind,
        events_path=args.events,
        out_dir=args.out,
        seed=args.seed,
        max_steps=args.steps,
        start=args.start or (),
    )
    result = run_pipeline(config)
    for path in result.artifacts:
        if path.endswith(".report"):
            sys.stdout.write(Path(path).read_text(encoding="utf-8"))
    return result.exit_code


def cmd_diff(args) -> int:
    entries = structural_diff(load_model(args.expected), load_model(args.actual))
    sys.stdout.write("".join(f"{entry.to_line()}\n" for entry in entries))
    if entries:
        console.failure(f"{len(entries)} difference(s)")
        return EXIT_FINDINGS
    console.success("Models are structurally equal")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(prog="tmuml", description="UML use-case and class models to Thinging Machine models")
    parser.add_argument("--quiet", action="store_true", help="suppress status lines on stderr")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=UsageParser)

    parse = commands.add_parser("parse", help="parse any input file and print its canonical form")
    parse.add_argument("file")
    parse.add_argument("--kind", choices=sorted(set(KINDS.values())))
    parse.add_argument("--tm", help="static model the events file refers to")
    parse.set_defaults(handler=cmd_parse)

    transform = commands.add_parser("transform", help="use case + class + bindings -> TM file")
    transform.add_argument("--usecase", required=True)
    transform.add_argument("--class", dest="class_file")
    transform.add_argument("--bind")
    transform.add_argument("-o", "--output")
    transform.set_defaults(handler=cmd_transform)

    validate = commands.add_parser("validate", help="well-formedness report of a TM file")
    validate.add_argument("tm")
    validate.set_defaults(handler=cmd_validate)

    for name, handler, help_text in (
        ("events", cmd_events, "event region report"),
        ("behavior", cmd_behavior, "method-path and reachability report"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("tm")
        sub.add_argument("events")
        if name == "behavior":
            sub.add_argument("--start", nargs="+")
        sub.set_defaults(handler=handler)

    sim = commands.add_parser("simulate", help="seeded trace over the behavior graph")
    sim.add_argument("tm")
    sim.add_argument("events")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--steps", type=int)
    sim.add_argument("--start", nargs="+")
    sim.add_argument("-o", "--output")
    sim.set_defaults(handler=cmd_simulate)

    recognize = commands.add_parser("recognize", help="method occurrences in a trace file")
    recognize.add_argument("tm")
    recognize.add_argument("events")
    recognize.add_argument("trace")
    recognize.set_defaults(handler=cmd_recognize)

    render = commands.add_parser("render", help="DOT diagram of one view")
    render.add_argument("tm")
    render.add_argument("--events")
    render.add_argument("--view", choices=VIEWS, default="static")
    render.add_argument("--no-storage", action="store_true")
    render.add_argument("--no-conditions", action="store_true")
    render.add_argument("-o", "--output")
    render.set_defaults(handler=cmd_render)

    pipeline = commands.add_parser("pipeline", help="every stage in order, artifacts written to --out")
    pipeline.add_argument("--usecase", required=True)
    pipeline.add_argument("--class", dest="class_file", required=True)
    pipeline.add_argument("--bind", required=True)
    pipeline.add_argument("--events", required=True)
    pipeline.add_argument("--out")
    pipeline.add_argument("--seed", type=int)
    pipeline.add_argument("--steps", type=int)
    pipeline.add_argument("--start", nargs="+")
    pipeline.set_defaults(handler=cmd_pipeline)

    diff = commands.add_parser("diff", help="structural differences between two TM files")
    diff.add_argument("expected")
    diff.add_argument("actual")
    diff.set_defaults(handler=cmd_diff)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        console.failure(str(exc))
        return EXIT_USAGE
    except SystemExit as exc:
        # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    console.set_quiet(args.quiet)
    try:
        return args.handler(args)
    except ParseError as exc:
        console.failure(exc.describe())
        return EXIT_PARSE
    except ConfigError as exc:
        console.failure(str(exc))
        return EXIT_USAGE
    except TmumlError as exc:
        console.failure(str(exc))
        return EXIT_FINDINGS
    finally:
        console.set_quiet(False)


if __name__ == "__main__":
    sys.exit(run())
