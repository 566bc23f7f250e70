import dataclasses
import json
import os
from functools import wraps
from typing import Any, List, Optional, Tuple

import click
import logging as log
from dotenv import load_dotenv

from .__version__ import __title__, __version__
from .constants import DEFAULT_LOG_LEVEL, JSON_SCHEMA_VERSION, MAX_DOWNSETS, SYSTEMS
from .config import get_settings
from .exceptions import ToposError
from .finmonad import (
    FinSetObj,
    check_monad,
    enumerate_algebras,
    get_monad,
    get_morphism,
    lift_morphism,
)
from .omega_action import build_omega_self, check_adjunction, load_instance, validate_instance
from .order_core import downsets_within, is_boolean, resolve_algebra, resolve_poset
from .pl_logic import (
    Valuation,
    check_proof,
    check_validity,
    eval_formula,
    format_formula,
    load_proof_file,
    match_schema,
    parse_formula,
)
from .presheaf_omega import (
    build_omega,
    count_truth_values,
    natural_transformations_to_omega,
    rank_order,
    render_crible,
)

load_dotenv(override=True)

log.basicConfig(level=os.getenv("TOPOS_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper())


def reports_usage_errors(command):
    """Turn library errors into click usage errors (exit code 2)."""

    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ToposError as e:
            raise click.UsageError(str(e))

    return wrapper


def as_json_line(ok: bool, result: Any, witness: Any) -> str:
    return json.dumps({"v": JSON_SCHEMA_VERSION, "ok": ok, "result": result, "witness": witness})


def emit(ok: bool, result: Any, witness: Any, lines: List[str]) -> None:
    ctx = click.get_current_context()
    if ctx.obj["json"]:
        click.echo(as_json_line(ok, result, witness))
    else:
        for line in lines:
            click.echo(line)
    ctx.exit(0 if ok else 1)


def require(value: Optional[str], option: str, env: str) -> str:
    if not value:
        raise click.UsageError(f"{option} must be provided either as an option or through {env}.")
    return value


class JsonAwareGroup(click.Group):
    """Under --json, usage errors are printed as a JSON verdict too (still exit code 2)."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            if not ctx.params.get("as_json"):
                raise
            click.echo(as_json_line(False, "usage error", e.format_message()))
            ctx.exit(e.exit_code)


@click.group(cls=JsonAwareGroup)
@click.version_option(
    version=__version__,
    prog_name=__title__,
)
@click.option("--json", "as_json", is_flag=True, help="Print one JSON object instead of text.")
@click.option(
    "--budget",
    type=int,
    help="Largest number of candidates a search may visit.",
    default=os.getenv("TOPOS_BUDGET"),
)
@click.pass_context
def main(ctx: click.Context, as_json: bool = False, budget: Optional[int] = None):
    """Finite posets, their Heyting algebras and presheaf truth values, propositional
    logic over them, Omega-valued sets, and monads on finite sets."""
    ctx.ensure_object(dict)
    ctx.obj["json"] = as_json
    ctx.obj["budget"] = budget if budget is not None else get_settings().budget


# topos


@main.group()
def topos():
    """Cribles and truth values of presheaves on a poset."""


@topos.command()
@click.option("--poset", help="Poset file or builtin name (powerset:N, chain:N, antichain:N, diamond, V).", default=os.getenv("TOPOS_POSET"))
@click.option("--at", "at", help="Element whose cribles are listed (default: the whole poset).")
@click.option("--order", type=click.Choice(["numeric", "rank"]), default="numeric", help="Bitset order or by height, then size.")
@reports_usage_errors
def cribles(poset: str = None, at: str = None, order: str = "numeric"):
    p = resolve_poset(require(poset, "--poset", "TOPOS_POSET"))
    universe = p.down_masks[p.index(at)] if at is not None else p.full_mask
    masks = downsets_within(p, universe, limit=MAX_DOWNSETS)
    if order == "rank":
        masks = rank_order(p, masks)
    rendered = [render_crible(p, mask) for mask in masks]
    emit(True, rendered, None, rendered)


@topos.command(name="truth-values")
@click.option("--poset", help="Poset file or builtin name.", default=os.getenv("TOPOS_POSET"))
@reports_usage_errors
def truth_values(poset: str = None):
    """Count the arrows 1 => Omega."""
    p = resolve_poset(require(poset, "--poset", "TOPOS_POSET"))
    if p.top() is not None:
        count = count_truth_values(p)
    else:
        count = len(natural_transformations_to_omega(build_omega(p)))
    emit(True, count, None, [str(count)])


@topos.command()
@click.option("--algebra", help="Algebra spec: a lattice poset, or downsets:<poset>.", default=os.getenv("TOPOS_ALGEBRA"))
@reports_usage_errors
def boolean(algebra: str = None):
    h = resolve_algebra(require(algebra, "--algebra", "TOPOS_ALGEBRA"))
    check = is_boolean(h)
    if check:
        emit(True, True, None, ["boolean"])
    label = h.labels[check.witness]
    emit(False, False, label, [f"not boolean: {label} | ~{label} is not top"])


# logic


@main.group()
def logic():
    """Propositional formulas, validity and Hilbert proofs."""


@logic.command()
@click.option("--formula", required=True, help="Formula, e.g. \"p0 | ~p0\".")
@click.option("--algebra", help="Algebra spec: a lattice poset, or downsets:<poset>.", default=os.getenv("TOPOS_ALGEBRA"))
@click.pass_context
@reports_usage_errors
def valid(ctx: click.Context, formula: str, algebra: str = None):
    """Search for a valuation that does not send the formula to top."""
    f = parse_formula(formula)
    h = resolve_algebra(require(algebra, "--algebra", "TOPOS_ALGEBRA"))
    verdict = check_validity(f, h, budget=ctx.obj["budget"])
    if verdict:
        emit(True, "valid", None, ["valid"])
    valuation = verdict.valuation.render()
    value = h.labels[verdict.value]
    lines = ["countermodel"] + [f"{var} = {label}" for var, label in valuation.items()] + [f"value = {value}"]
    emit(False, {"verdict": "countermodel", "value": value}, valuation, lines)


def parse_assignment(h, assignments: Tuple[str, ...]) -> Valuation:
    values = {}
    for item in assignments:
        name, sep, label = item.partition("=")
        if not sep or not name.strip().startswith("p") or not name.strip()[1:].isdigit():
            raise click.UsageError(f"Assignments look like p0={{1}}, got {item!r}")
        values[int(name.strip()[1:])] = h.index(label.strip())
    return Valuation(values, h)


@logic.command(name="eval")
@click.option("--formula", required=True, help="Formula to evaluate.")
@click.option("--algebra", help="Algebra spec.", default=os.getenv("TOPOS_ALGEBRA"))
@click.option("--assign", "assignments", multiple=True, help="Variable value as pN=<element label>; repeatable.")
@reports_usage_errors
def evaluate(formula: str, algebra: str = None, assignments: Tuple[str, ...] = ()):
    f = parse_formula(formula)
    h = resolve_algebra(require(algebra, "--algebra", "TOPOS_ALGEBRA"))
    value = h.labels[eval_formula(f, parse_assignment(h, assignments))]
    emit(True, value, None, [value])


@logic.command()
@click.option("--formula", required=True, help="Formula to match.")
@click.option("--schema", required=True, type=int, help="Axiom schema number, 1 to 12.")
@reports_usage_errors
def match(formula: str, schema: int):
    verdict = match_schema(parse_formula(formula), schema)
    if not verdict:
        emit(False, "no match", None, ["no match"])
    bindings = verdict.render()
    emit(True, bindings, None, [f"{name} = {f}" for name, f in bindings.items()])


@logic.command()
@click.option("--file", "path", required=True, type=click.Path(exists=True, dir_okay=False), help="Proof file.")
@click.option("--system", type=click.Choice(SYSTEMS), help="Override the system named in the file header.")
@reports_usage_errors
def proof(path: str, system: str = None):
    p = load_proof_file(path)
    if system is not None:
        p = dataclasses.replace(p, system=system)
    verdict = check_proof(p)
    if verdict:
        conclusion = format_formula(p.conclusion) if p.conclusion is not None else ""
        emit(True, {"verdict": "accepted", "system": p.system, "conclusion": conclusion}, None, [f"accepted ({p.system}): {conclusion}"])
    witness = {"line": verdict.line, "reason": verdict.reason.value, "detail": verdict.detail}
    emit(False, "rejected", witness, [f"rejected at line {verdict.line}: {verdict.reason.value} ({verdict.detail})"])


# omega


@main.group()
def omega():
    """Omega-valued sets."""


@omega.command()
@click.option("--algebra", help="Algebra spec.", default=os.getenv("TOPOS_ALGEBRA"))
@click.option("--instance", type=click.Path(exists=True, dir_okay=False), help="Table file; defaults to the algebra acting on itself.")
@reports_usage_errors
def check(algebra: str = None, instance: str = None):
    """Validate the laws of an Omega-set and the adjunction at every point."""
    h = resolve_algebra(require(algebra, "--algebra", "TOPOS_ALGEBRA"))
    inst = load_instance(instance, h) if instance else build_omega_self(h)
    verdict = validate_instance(inst)
    if verdict:
        for p in range(inst.size):
            verdict = check_adjunction(inst, p)
            if not verdict:
                verdict = dataclasses.replace(verdict, law=f"{verdict.law} at point {p}")
                break
    if verdict:
        emit(True, {"points": inst.size}, None, [f"ok: {inst.size} points"])
    emit(False, verdict.law, list(verdict.witness), [f"violation: {verdict.law} at {list(verdict.witness)}"])


# monad


@main.group()
def monad():
    """Monads on finite sets and the lifting of their algebras."""


@monad.command(name="check")
@click.option("--monad", "name", required=True, help="identity, maybe, powerset or nonempty-powerset.")
@click.option("--size", type=click.IntRange(min=1), help="Largest carrier checked (default: the monad's bound).")
@reports_usage_errors
def check_monad_command(name: str, size: int = None):
    verdict = check_monad(get_monad(name), size_bound=size)
    if verdict:
        emit(True, "ok", None, ["ok"])
    emit(False, verdict.law, list(verdict.witness), [f"violation: {verdict.law} at {list(verdict.witness)}"])


@monad.command()
@click.option("--from", "source", required=True, help="Monad whose algebras are lifted.")
@click.option("--to", "target", required=True, help="Monad the lifted algebras belong to.")
@click.option("--carrier", type=click.IntRange(min=1), required=True, help="Size of the carrier {0..n-1}.")
@click.pass_context
@reports_usage_errors
def lift(ctx: click.Context, source: str, target: str, carrier: int):
    """Lift every algebra on the carrier along the builtin morphism."""
    m = get_morphism(source, target)
    verdict = m.verdict
    if not verdict:
        emit(False, verdict.law, list(verdict.witness), [f"{m.name}: violation of {verdict.law} at {list(verdict.witness)}"])

    lines = [f"{m.name}: ok"]
    result = []
    algebras = enumerate_algebras(m.source, FinSetObj.standard(carrier), budget=ctx.obj["budget"])
    for k, alg in enumerate(algebras, start=1):
        lifted = lift_morphism(m, alg)
        lines.append(f"algebra {k} of {len(algebras)}")
        lines.extend(f"  {line}" for line in alg.lines())
        lines.append("lifted")
        lines.extend(f"  {line}" for line in lifted.lines())
        result.append({"algebra": alg.lines(), "lifted": lifted.lines()})
    emit(True, result, None, lines)


if __name__ == "__main__":
    main()
