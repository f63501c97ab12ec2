"""
Scott Lab
---------

Command line front end for the scottlab package: formula classification and
negation, finite structures and their orbits, Scott sentences and their
verification sweeps, Henkin-style constructions, finitely generated groups
and the staged-tree structures.

Every run prints a deterministic report (stdout or ``--out``) and can write a
manifest (``--manifest``) recording the command, input digests and bounds;
``replay --manifest FILE`` reruns it and compares the report digest.

Exit codes: 0 success, 1 verification mismatch, 2 input error, 3 budget
exhausted.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from pydantic import TypeAdapter, ValidationError

from config import Settings, load_settings
from constants import (
    BUNDLED_GROUPS,
    DEFAULT_ALPHA,
    DEFAULT_COPIES,
    DEFAULT_DEPTH,
    DEFAULT_LENGTH,
    DEFAULT_MAX_SIZE,
    DEFAULT_RADIUS,
    DEFAULT_STEPS,
    EXIT_CODES,
)
from scottlab import __version__
from scottlab.complexity import classify, is_d_sigma
from scottlab.errors import EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, GroupFormatError, InputError, ScottLabError
from scottlab.games import back_and_forth_equivalent
from scottlab.groups import (
    GroupOracle,
    ball_check,
    bounded_model_check,
    build_oracle,
    extract_pi1_orbit,
    ho_d_sigma2,
    load_group,
    parse_tuple,
    self_reflective_search,
    sigma3_scott,
    tuple_assignment,
)
from scottlab.henkin import (
    ConsistencySession,
    build_model_chain,
    d_sigma_scott_from_pair,
    extract_orbit_generator,
    extract_separator,
)
from scottlab.manifest import RunManifest, load_manifest, sha256_file, sha256_text, write_manifest
from scottlab.scott import (
    OrbitFamily,
    diagram_sentence,
    orbit_formula,
    scott_family_sentence,
    scott_sentence_from_orbits,
    verify_scott_sentence,
)
from scottlab.semantics import Evaluator, Verdict3
from scottlab.sexpr import format_formula, parse_formula, parse_formulas
from scottlab.structures import (
    SignatureModel,
    automorphism_orbits,
    count_structures,
    dump_structure,
    enumerate_structures,
    isomorphic,
    isomorphism_classes,
    load_structure,
)
from scottlab.syntax import Formula, negate
from scottlab.trees import axioms, build_structure, build_tree, load_trace, sigma2_transfer_probe

logger = logging.getLogger(__name__)

OUTCOMES = {code: name for name, code in EXIT_CODES.items()}

# Flags that only say where output goes; a manifest's command leaves them out.
OUTPUT_FLAGS = ("--out", "--manifest", "--export")

INPUT_FIELDS = (
    "formula",
    "structure",
    "other",
    "signature",
    "sentence",
    "target",
    "initial",
    "phi",
    "psi",
    "sigma",
    "pi",
    "sigma2",
    "group",
    "trace",
)

BOUND_FIELDS = (
    "max_size",
    "max_length",
    "length",
    "radius",
    "budget",
    "schema_budget",
    "ceiling",
    "alpha",
    "steps",
    "bound",
    "depth",
    "copies",
    "special_count",
    "count",
)

_INT_TUPLE = TypeAdapter(List[int])


@dataclass
class CommandResult:
    report: str
    exit_code: int = EXIT_OK
    frame: Optional[pd.DataFrame] = None


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------


def read_formula(path: Path) -> Formula:
    return parse_formula(Path(path).read_text(encoding="utf-8"))


def read_formulas(path: Path) -> List[Formula]:
    return parse_formulas(Path(path).read_text(encoding="utf-8"))


def read_signature(path: Path):
    try:
        model = SignatureModel.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise InputError(f"Invalid signature file: {exc}") from None
    return model.to_signature()


def parse_element_tuple(text: str) -> Tuple[int, ...]:
    try:
        return tuple(_INT_TUPLE.validate_json(text))
    except ValidationError as exc:
        raise InputError(f"Tuple must be a JSON list of element indices: {exc}") from None


def parse_json_list(text: str) -> list:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"Tuple must be a JSON list: {exc}") from None
    if not isinstance(data, list):
        raise InputError("Tuple must be a JSON list")
    return data


def resolve_group(spec: str) -> GroupOracle:
    """A bundled group name or a group file."""
    if spec in BUNDLED_GROUPS:
        return build_oracle(BUNDLED_GROUPS[spec])
    path = Path(spec)
    if not path.is_file():
        raise GroupFormatError(f"Unknown group {spec!r}: not a file and not one of {', '.join(BUNDLED_GROUPS)}")
    return load_group(path)


def replayable_command(argv: Sequence[str]) -> List[str]:
    command: List[str] = []
    skip = False
    for token in argv:
        if skip:
            skip = False
            continue
        if token in OUTPUT_FLAGS:
            skip = True
            continue
        if token.split("=", 1)[0] in OUTPUT_FLAGS or token == "--verbose":
            continue
        command.append(token)
    return command


def collect_inputs(args: argparse.Namespace) -> Dict[str, str]:
    inputs: Dict[str, str] = {}
    for name in INPUT_FIELDS:
        value = getattr(args, name, None)
        if value is None:
            continue
        path = Path(value)
        if path.is_file():
            inputs[str(value)] = sha256_file(path)
    return inputs


def collect_bounds(args: argparse.Namespace) -> Dict[str, Union[int, str]]:
    return {name: getattr(args, name) for name in BOUND_FIELDS if getattr(args, name, None) is not None}


def _comment(text: str) -> str:
    return f"; {text}"


def _formula_report(header: Sequence[str], formula: Formula) -> str:
    lines = [_comment(line) for line in header]
    lines.append(_comment(f"classification: {classify(formula)}"))
    lines.append(format_formula(formula))
    return "\n".join(lines) + "\n"


def _bounds_line(**bounds) -> str:
    return "bounds: " + " ".join(f"{name}={value}" for name, value in bounds.items())


# ---------------------------------------------------------------------------
# formula
# ---------------------------------------------------------------------------


def cmd_formula_classify(args, settings: Settings) -> CommandResult:
    return CommandResult("".join(f"{classify(formula)}\n" for formula in read_formulas(args.formula)))


def cmd_formula_negate(args, settings: Settings) -> CommandResult:
    return CommandResult("".join(format_formula(negate(formula)) + "\n" for formula in read_formulas(args.formula)))


def cmd_formula_print(args, settings: Settings) -> CommandResult:
    return CommandResult("".join(format_formula(formula) + "\n" for formula in read_formulas(args.formula)))


# ---------------------------------------------------------------------------
# structure and orbits
# ---------------------------------------------------------------------------


def cmd_structure_enumerate(args, settings: Settings) -> CommandResult:
    signature = read_signature(args.signature)
    rows = []
    for size in range(1, args.max_size + 1):
        row = {"size": size, "structures": count_structures(signature, size)}
        if args.classes:
            structures = list(enumerate_structures(signature, size, ceiling=args.ceiling))
            row["classes"] = len(isomorphism_classes(structures))
        rows.append(row)
    frame = pd.DataFrame(rows)
    lines = [_bounds_line(max_size=args.max_size, ceiling=args.ceiling)]
    for row in rows:
        line = f"size {row['size']}: {row['structures']} structures"
        if args.classes:
            line += f", {row['classes']} isomorphism classes"
        lines.append(line)
    return CommandResult("\n".join(lines) + "\n", frame=frame)


def cmd_structure_iso(args, settings: Settings) -> CommandResult:
    a = load_structure(args.structure)
    b = load_structure(args.other)
    perm = isomorphic(a, b)
    lines = [f"isomorphism: {json.dumps(list(perm))}" if perm is not None else "not isomorphic"]
    lines.append(f"back-and-forth equivalent: {'yes' if back_and_forth_equivalent(a, b) else 'no'}")
    return CommandResult("\n".join(lines) + "\n")


def cmd_structure_orbits(args, settings: Settings) -> CommandResult:
    structure = load_structure(args.structure)
    blocks = automorphism_orbits(structure, args.length)
    lines = [f"orbit {index}: {json.dumps([list(t) for t in block])}" for index, block in enumerate(blocks)]
    return CommandResult("\n".join(lines) + "\n")


def cmd_orbits(args, settings: Settings) -> CommandResult:
    structure = load_structure(args.structure)
    lines = []
    for block in automorphism_orbits(structure, args.length):
        formula = orbit_formula(structure, block[0], covering=not args.no_covering)
        lines.append(_comment(f"orbit {json.dumps([list(t) for t in block])}: {classify(formula)}"))
        lines.append(format_formula(formula))
    return CommandResult("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# scott
# ---------------------------------------------------------------------------


def cmd_scott_synth(args, settings: Settings) -> CommandResult:
    structure = load_structure(args.structure)
    if args.method == "diagram":
        sentence = diagram_sentence(structure)
    elif args.method == "family":
        sentence = scott_family_sentence(structure, max_length=args.max_length, budget=settings.schema_budget)
    else:
        sentence = scott_sentence_from_orbits(structure, OrbitFamily.build(structure, args.max_length))
    header = [f"method={args.method} size={structure.size} max_length={args.max_length or structure.size}"]
    return CommandResult(_formula_report(header, sentence))


def cmd_scott_verify(args, settings: Settings) -> CommandResult:
    report = verify_scott_sentence(
        read_formula(args.sentence),
        load_structure(args.structure),
        args.max_size,
        budget=args.budget,
        ceiling=args.ceiling,
    )
    return CommandResult(report.to_text(), EXIT_OK if report.ok else EXIT_MISMATCH, report.frame)


# ---------------------------------------------------------------------------
# henkin
# ---------------------------------------------------------------------------


def cmd_henkin_build(args, settings: Settings) -> CommandResult:
    structure = load_structure(args.structure)
    target = read_formula(args.target) if args.target else None
    initial = read_formulas(args.initial) if args.initial else []
    session = ConsistencySession(structure, args.alpha, target, args.budget, args.schema_budget)
    try:
        result = build_model_chain(session, args.steps, initial)
    finally:
        if args.transcript:
            export_transcript(session.transcript_lines(), args.transcript)

    lines = [
        _bounds_line(alpha=args.alpha, steps=args.steps, budget=args.budget, schema_budget=args.schema_budget),
        f"steps taken: {result.steps}",
        f"pending demands: {result.pending}",
        f"final set ({len(result.final)} sentences):",
    ]
    lines += [f"  {format_formula(sentence)}" for sentence in sorted(result.final, key=format_formula)]
    if result.structure is None:
        lines.append("read-off structure: incomplete")
    else:
        iso = isomorphic(result.structure, structure) is not None
        lines.append(f"read-off structure: {'isomorphic to' if iso else 'differs from'} the target")
        lines.append(f"chain sentences true in read-off structure: {'yes' if result.all_true else 'no'}")
    return CommandResult("\n".join(lines) + "\n")


def cmd_henkin_extract_orbit(args, settings: Settings) -> CommandResult:
    structure = load_structure(args.structure)
    tup = parse_element_tuple(args.tuple)
    formula = extract_orbit_generator(structure, tup, args.alpha, args.budget)
    return CommandResult(_formula_report([f"tuple={json.dumps(list(tup))} alpha={args.alpha} budget={args.budget}"], formula))


def cmd_henkin_separate(args, settings: Settings) -> CommandResult:
    structure = load_structure(args.structure)
    separator = extract_separator(
        read_formula(args.phi),
        read_formula(args.psi),
        structure,
        args.bound,
        budget=args.budget,
        alpha=args.alpha,
        schema_budget=args.schema_budget,
        ceiling=args.ceiling,
    )
    sigma_part, pi_part = separator.children
    header = [
        f"bound={args.bound} budget={args.budget}",
        f"conjuncts: {classify(sigma_part)} {classify(pi_part)}",
    ]
    return CommandResult(_formula_report(header, separator))


def cmd_henkin_dsigma(args, settings: Settings) -> CommandResult:
    structure = load_structure(args.structure)
    if (args.sigma is None) != (args.pi is None):
        raise InputError("Give both --sigma and --pi, or neither")
    if args.sigma is None:
        sigma_sentence = diagram_sentence(structure)
        pi_sentence = scott_sentence_from_orbits(structure, OrbitFamily.build(structure))
    else:
        sigma_sentence, pi_sentence = read_formula(args.sigma), read_formula(args.pi)
    sentence = d_sigma_scott_from_pair(
        structure, sigma_sentence, pi_sentence, args.bound, args.budget, args.schema_budget, args.ceiling
    )
    header = [f"bound={args.bound} budget={args.budget}", f"d-Sigma_1: {'yes' if is_d_sigma(sentence, 1) else 'no'}"]
    exit_code = EXIT_OK
    if args.verify:
        report = verify_scott_sentence(sentence, structure, args.bound, args.schema_budget, args.ceiling)
        header.append(f"verification at size <= {args.bound}: {report.summary()}")
        exit_code = EXIT_OK if report.ok else EXIT_MISMATCH
    return CommandResult(_formula_report(header, sentence), exit_code)


# ---------------------------------------------------------------------------
# group
# ---------------------------------------------------------------------------


def _group_header(oracle: GroupOracle, args) -> List[str]:
    description = oracle.describe()
    return [
        f"group={description['name']} kind={description['kind']} generators={json.dumps(description['generators'])}",
        _bounds_line(radius=args.radius, length=args.length, budget=args.budget),
    ]


def _verdict_lines(label: str, oracle: GroupOracle, formula: Formula, args, valuation=None) -> List[str]:
    sound = bounded_model_check(oracle, formula, args.radius, args.budget, valuation)
    relativized = ball_check(oracle, formula, args.radius, args.budget, valuation)
    return [f"{label} (sound): {sound}", f"{label} (ball): {relativized.value}"]


def cmd_group_scott3(args, settings: Settings) -> CommandResult:
    oracle = resolve_group(args.group)
    sentence = sigma3_scott(oracle, args.length)
    header = _group_header(oracle, args) + _verdict_lines("at home", oracle, sentence, args)
    return CommandResult(_formula_report(header, sentence))


def cmd_group_dsigma2(args, settings: Settings) -> CommandResult:
    oracle = resolve_group(args.group)
    if args.phi is not None:
        phi = read_formula(args.phi)
    else:
        phi = oracle.pi1_orbit_formula(args.length)
        if phi is None:
            raise InputError(f"{oracle.name} has no built-in orbit formula; pass one with --phi")
    sentence = ho_d_sigma2(oracle, phi, args.length, args.radius, args.budget)
    header = _group_header(oracle, args)
    header.append(f"d-Sigma_2: {'yes' if is_d_sigma(sentence, 2) else 'no'}")
    header += _verdict_lines("at home", oracle, sentence, args)
    for name in args.against or []:
        header += _verdict_lines(f"on {name}", resolve_group(name), sentence, args)
    return CommandResult(_formula_report(header, sentence))


def cmd_group_pi1_orbit(args, settings: Settings) -> CommandResult:
    oracle = resolve_group(args.group)
    tup = parse_tuple(oracle, parse_json_list(args.tuple)) if args.tuple else oracle.generators
    formula = extract_pi1_orbit(oracle, read_formula(args.sigma2), tup, args.radius, args.budget)
    header = _group_header(oracle, args)
    header += _verdict_lines("at the tuple", oracle, formula, args, tuple_assignment(tup))
    return CommandResult(_formula_report(header, formula))


def cmd_group_self_reflect(args, settings: Settings) -> CommandResult:
    oracle = resolve_group(args.group)
    tup = parse_tuple(oracle, parse_json_list(args.tuple)) if args.tuple else None
    result = self_reflective_search(oracle, tup, args.radius, args.length)
    return CommandResult(result.to_text(), frame=result.rejections)


# ---------------------------------------------------------------------------
# tree
# ---------------------------------------------------------------------------


def cmd_tree_build(args, settings: Settings) -> CommandResult:
    return CommandResult(build_tree(load_trace(args.trace), args.depth).to_text())


def cmd_tree_emit_structure(args, settings: Settings) -> CommandResult:
    tree = build_tree(load_trace(args.trace), args.depth)
    built = build_structure(tree, args.flavor, args.depth, args.copies, args.special_count)
    logger.info("%s-approximation with %s elements, special elements %s", args.flavor, built.structure.size, built.special)
    return CommandResult(dump_structure(built.structure))


def cmd_tree_axioms(args, settings: Settings) -> CommandResult:
    tree = build_tree(load_trace(args.trace), args.depth)
    count = args.count or args.copies
    built = build_structure(tree, "A", args.depth, args.copies)
    evaluator = Evaluator(built.structure, budget=settings.schema_budget)
    lines = [_comment(_bounds_line(depth=args.depth, count=count, copies=args.copies))]
    failures = 0
    for sentence in axioms(tree, args.depth, count):
        verdict = evaluator.evaluate(sentence)
        failures += verdict is not Verdict3.TRUE
        lines.append(_comment(f"A-approx: {verdict.value}"))
        lines.append(format_formula(sentence))
    return CommandResult("\n".join(lines) + "\n", EXIT_MISMATCH if failures else EXIT_OK)


def cmd_tree_probe(args, settings: Settings) -> CommandResult:
    tree = build_tree(load_trace(args.trace), args.depth)
    report = sigma2_transfer_probe(tree, read_formula(args.sentence), args.depth, args.copies, settings.schema_budget)
    return CommandResult(report.to_text(), frame=report.frame)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def cmd_replay(args, settings: Settings) -> CommandResult:
    manifest = load_manifest(args.source)
    changed = manifest.changed_inputs()
    if changed:
        logger.error("Inputs changed since the manifest was written: %s", ", ".join(changed))
        return CommandResult(f"inputs changed: {', '.join(changed)}\n", EXIT_INPUT)
    if manifest.version != __version__:
        logger.warning("Manifest written by version %s", manifest.version)
    _, result = execute(manifest.command, settings)
    digest = sha256_text(result.report)
    if digest == manifest.report_sha256 and result.exit_code == manifest.exit_code:
        return CommandResult(f"identical: {digest}\n")
    return CommandResult(
        f"report differs: expected {manifest.report_sha256} (exit {manifest.exit_code}), "
        f"got {digest} (exit {result.exit_code})\n",
        EXIT_MISMATCH,
    )


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def print_report(report: str, destination: Optional[Path]) -> None:
    if destination is None:
        sys.stdout.write(report)
        return
    destination.parent.mkdir(parents=True, exist_ok=True)
    destination.write_text(report, encoding="utf-8")


def export_table(frame: pd.DataFrame, destination: Path) -> None:
    destination.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(destination, index=False)


def export_transcript(lines: Sequence[str], destination: Path) -> None:
    destination.parent.mkdir(parents=True, exist_ok=True)
    destination.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_arg_parser(settings: Optional[Settings] = None) -> argparse.ArgumentParser:
    settings = settings or load_settings()

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="Write the report here instead of stdout.")
    common.add_argument("--manifest", type=Path, help="Write a run manifest to this path.")
    common.add_argument("--export", type=Path, help="Optional CSV path for the report table.")
    common.add_argument("--verbose", action="store_true", help="Enable debug logging.")

    parser = argparse.ArgumentParser(
        description="Scott sentences, Henkin constructions and bounded group checks at desk scale."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def leaf(group, name: str, handler, help_text: str) -> argparse.ArgumentParser:
        sub = group.add_parser(name, parents=[common], help=help_text)
        sub.set_defaults(handler=handler)
        return sub

    def nested(name: str, help_text: str):
        sub = commands.add_parser(name, help=help_text)
        return sub.add_subparsers(dest="action", required=True)

    def add_schema_budget(sub, flag: str = "--schema-budget") -> None:
        sub.add_argument(flag, type=int, default=settings.schema_budget, help="Children read from each schema connective.")

    def add_ceiling(sub) -> None:
        sub.add_argument("--ceiling", type=int, default=settings.max_structures,
                         help="Refuse enumerations larger than this many structures.")

    formula = nested("formula", "Classify, negate or reprint formulas.")
    for name, handler, help_text in (
        ("classify", cmd_formula_classify, "Print (side, rank) for each formula."),
        ("negate", cmd_formula_negate, "Print the normal-form negation of each formula."),
        ("print", cmd_formula_print, "Reprint each formula canonically."),
    ):
        sub = leaf(formula, name, handler, help_text)
        sub.add_argument("formula", type=Path, help="File of formulas in the s-expression syntax.")

    structure = nested("structure", "Enumerate, compare and inspect finite structures.")
    sub = leaf(structure, "enumerate", cmd_structure_enumerate, "Count structures per size.")
    sub.add_argument("signature", type=Path, help="Signature JSON file.")
    sub.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE, help="Largest universe size.")
    sub.add_argument("--classes", action="store_true", help="Also count isomorphism classes.")
    add_ceiling(sub)
    sub = leaf(structure, "iso", cmd_structure_iso, "Least isomorphism between two structures.")
    sub.add_argument("structure", type=Path)
    sub.add_argument("other", type=Path)
    sub = leaf(structure, "orbits", cmd_structure_orbits, "Automorphism orbits of k-tuples.")
    sub.add_argument("structure", type=Path)
    sub.add_argument("--length", type=int, default=1, help="Tuple length k.")

    sub = leaf(commands, "orbits", cmd_orbits, "Orbit-defining formulas for every orbit of k-tuples.")
    sub.add_argument("structure", type=Path)
    sub.add_argument("--length", type=int, default=1, help="Tuple length k.")
    sub.add_argument("--no-covering", action="store_true", help="Leave out the covering clause.")

    scott = nested("scott", "Synthesize and verify Scott sentences.")
    sub = leaf(scott, "synth", cmd_scott_synth, "Scott sentence of a finite structure.")
    sub.add_argument("structure", type=Path)
    sub.add_argument("--method", choices=("orbits", "diagram", "family"), default="orbits")
    sub.add_argument("--max-length", type=int, help="Longest tuple in the orbit family (default: size).")
    sub = leaf(scott, "verify", cmd_scott_verify, "Sweep all small structures against a sentence.")
    sub.add_argument("sentence", type=Path)
    sub.add_argument("structure", type=Path)
    sub.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE)
    add_schema_budget(sub, "--budget")
    add_ceiling(sub)

    henkin = nested("henkin", "Henkin constructions over a finite target.")
    sub = leaf(henkin, "build", cmd_henkin_build, "Run a fair chain of closure steps.")
    sub.add_argument("structure", type=Path)
    sub.add_argument("--target", type=Path, help="Target sentence whose witnesses the chain must supply.")
    sub.add_argument("--initial", type=Path, help="File of initial sentences in Henkin constants.")
    sub.add_argument("--alpha", type=int, default=DEFAULT_ALPHA)
    sub.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    sub.add_argument("--transcript", type=Path, help="Write the session transcript as JSON lines.")
    sub.add_argument("--budget", type=int, default=settings.search_budget)
    add_schema_budget(sub)
    sub = leaf(henkin, "extract-orbit", cmd_henkin_extract_orbit, "Existential generator of a tuple's orbit.")
    sub.add_argument("structure", type=Path)
    sub.add_argument("--tuple", required=True, help="JSON list of element indices, e.g. [0, 1].")
    sub.add_argument("--alpha", type=int, default=DEFAULT_ALPHA)
    sub.add_argument("--budget", type=int, default=settings.search_budget)
    sub = leaf(henkin, "separate", cmd_henkin_separate, "d-Sigma separator of phi from psi.")
    sub.add_argument("structure", type=Path)
    sub.add_argument("--phi", type=Path, required=True)
    sub.add_argument("--psi", type=Path, required=True)
    sub.add_argument("--bound", type=int, default=DEFAULT_MAX_SIZE + 1, help="Disjointness check size bound.")
    sub.add_argument("--alpha", type=int)
    sub.add_argument("--budget", type=int, default=settings.search_budget)
    add_schema_budget(sub)
    add_ceiling(sub)
    sub = leaf(henkin, "dsigma", cmd_henkin_dsigma, "d-Sigma Scott sentence from a Sigma/Pi pair.")
    sub.add_argument("structure", type=Path)
    sub.add_argument("--sigma", type=Path, help="Sigma Scott sentence (default: the diagram sentence).")
    sub.add_argument("--pi", type=Path, help="Pi Scott sentence (default: the orbit-family sentence).")
    sub.add_argument("--bound", type=int, default=DEFAULT_MAX_SIZE)
    sub.add_argument("--verify", action="store_true", help="Sweep the result up to --bound.")
    sub.add_argument("--budget", type=int, default=settings.search_budget)
    add_schema_budget(sub)
    add_ceiling(sub)

    group = nested("group", "Bounded checks on finitely generated groups.")
    for name, handler, help_text in (
        ("scott3", cmd_group_scott3, "Sigma_3 Scott sentence and its home verdict."),
        ("dsigma2", cmd_group_dsigma2, "d-Sigma_2 Scott sentence from an orbit formula."),
        ("pi1-orbit", cmd_group_pi1_orbit, "Pi_1 orbit formula from a Sigma_2 one."),
        ("self-reflect", cmd_group_self_reflect, "Bounded search for a self-reflectivity witness."),
    ):
        sub = leaf(group, name, handler, help_text)
        sub.add_argument("group", help=f"Group file or bundled name ({', '.join(BUNDLED_GROUPS)}).")
        sub.add_argument("--radius", type=int, default=DEFAULT_RADIUS)
        sub.add_argument("--length", type=int, default=DEFAULT_LENGTH)
        add_schema_budget(sub, "--budget")
        if name == "dsigma2":
            sub.add_argument("--phi", type=Path, help="Orbit formula in x1..xk (default: the built-in one).")
            sub.add_argument("--against", action="append", help="Also evaluate on this group; repeatable.")
        if name == "pi1-orbit":
            sub.add_argument("--sigma2", type=Path, required=True, help="Sigma_2 orbit formula in x1..xk.")
        if name in ("pi1-orbit", "self-reflect"):
            sub.add_argument("--tuple", help="JSON list of elements (default: the generators).")

    tree = nested("tree", "Staged trees and their path structures.")
    for name, handler, help_text in (
        ("build", cmd_tree_build, "Print the staged tree."),
        ("emit-structure", cmd_tree_emit_structure, "Write an A- or B-approximation as a structure file."),
        ("axioms", cmd_tree_axioms, "List the axioms with their verdicts on the A-approximation."),
        ("probe", cmd_tree_probe, "Evaluate a Sigma_2 sentence on both approximations."),
    ):
        sub = leaf(tree, name, handler, help_text)
        sub.add_argument("--trace", type=Path, required=True, help="JSON list of [k, s] halting pairs.")
        sub.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
        if name != "build":
            sub.add_argument("--copies", type=int, default=DEFAULT_COPIES)
        if name == "emit-structure":
            sub.add_argument("--flavor", choices=("A", "B"), required=True)
            sub.add_argument("--special-count", type=int, default=1)
        if name == "axioms":
            sub.add_argument("--count", type=int, help="Counting bound in the axioms (default: --copies).")
        if name == "probe":
            sub.add_argument("--sentence", type=Path, required=True)

    sub = commands.add_parser("replay", help="Rerun a manifest and compare the report digest.")
    sub.add_argument("--manifest", dest="source", type=Path, required=True)
    sub.add_argument("--verbose", action="store_true", help="Enable debug logging.")
    sub.set_defaults(handler=cmd_replay)

    return parser


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def execute(argv: Sequence[str], settings: Optional[Settings] = None) -> Tuple[argparse.Namespace, CommandResult]:
    settings = settings or load_settings()
    args = build_arg_parser(settings).parse_args(list(argv))
    try:
        try:
            result = args.handler(args, settings)
        except (OSError, UnicodeDecodeError) as exc:
            raise InputError(f"Cannot read input: {exc}") from exc
    except ScottLabError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        result = CommandResult(f"error: {exc}\n", exc.exit_code)
    return args, result


def dispatch(argv: Sequence[str], settings: Optional[Settings] = None) -> int:
    argv = list(argv)
    args, result = execute(argv, settings)

    print_report(result.report, getattr(args, "out", None))

    export = getattr(args, "export", None)
    if export:
        if result.frame is None:
            logger.warning("This command has no table to export")
        else:
            export_table(result.frame, export)
            logger.info("Exported table to %s", export)

    manifest_path = getattr(args, "manifest", None)
    if manifest_path:
        manifest = RunManifest(
            command=replayable_command(argv),
            inputs=collect_inputs(args),
            bounds=collect_bounds(args),
            exit_code=result.exit_code,
            outcome=OUTCOMES.get(result.exit_code, "error"),
            report_sha256=sha256_text(result.report),
        )
        write_manifest(manifest, manifest_path)
        logger.info("Wrote manifest to %s", manifest_path)
    return result.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(
        level=logging.DEBUG if "--verbose" in argv else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
