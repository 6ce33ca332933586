"""Command line front end: price, cumulant diagnostics and MC validation.

Jobs are described by a YAML file with named sections (model, contract,
contour, solver, sim) whose field names match the parameter records
one-to-one.  Subcommands:

    geomasian price <config> [--format table|csv|jsonl] [--out path] [--threads n]
    geomasian cumulant <config> --grid <spec> [...]
    geomasian validate <config> [...]

Exit codes: 0 success, 2 config error, 3 pricing error, 4 validation
failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np
import yaml

from .contracts import ContractSpec, PayoffKind
from .errors import (
    BlowUpError,
    ConfigError,
    DomainExitError,
    GeomasianError,
    NoValidAbscissaError,
    PoleProximityError,
    StepUnderflowError,
    TailNotDecayingError,
    UnsupportedModelError,
)
from .mc import SimConfig, mc_price, simulate_terminal
from .models import (
    BaseLevy,
    Bates,
    Bns,
    CirTcLevy,
    CustomSubordinator,
    GammaOuSubordinator,
    Heston,
    InverseGaussianSubordinator,
    KouJumps,
    ModelSpec,
    NoJumps,
    NormalJumps,
    OuTcLevy,
    TurboBates,
    model_name,
)
from .pricing import ContourConfig, price_strikes
from .riccati import SolverConfig, cumulant_average_price, cumulant_average_strike

__all__ = ["JobConfig", "load_job_config", "parse_job_config", "job_to_dict", "main", "console_entry"]

_PRICING_ERRORS = (
    BlowUpError,
    StepUnderflowError,
    DomainExitError,
    NoValidAbscissaError,
    TailNotDecayingError,
    PoleProximityError,
    UnsupportedModelError,
)


@dataclass(frozen=True)
class JobConfig:
    model: ModelSpec
    contract: ContractSpec
    contour: ContourConfig
    solver: SolverConfig
    sim: SimConfig | None
    strikes: tuple[float, ...] | None
    output: str
    out_path: str | None


# ---------------------------------------------------------------------------
# Section parsing
# ---------------------------------------------------------------------------

def _section(data: dict, name: str, required: bool) -> dict | None:
    if name not in data:
        if required:
            raise ConfigError(f"missing required section '{name}'")
        return None
    sec = data[name]
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    return sec


def _check_keys(d: dict, allowed: set[str], where: str) -> None:
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{where}: unknown field '{k}'")


def _num(d: dict, key: str, where: str, required: bool = True, default=None) -> float | None:
    if key not in d:
        if required:
            raise ConfigError(f"{where}: missing required field '{key}'")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _int(d: dict, key: str, where: str, required: bool = True, default=None) -> int | None:
    if key not in d:
        if required:
            raise ConfigError(f"{where}: missing required field '{key}'")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
    return v


def _auto_or_num(d: dict, key: str, where: str) -> float | None:
    if key not in d:
        return None
    v = d[key]
    if isinstance(v, str):
        if v.lower() == "auto":
            return None
        raise ConfigError(f"{where}.{key}: expected a number or 'auto', got {v!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number or 'auto', got {v!r}")
    return float(v)


def _build_jump_law(d, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: jumpLaw must be a mapping")
    variant = str(d.get("variant", "")).lower()
    try:
        if variant == "normal":
            _check_keys(d, {"variant", "mean", "stdev"}, where)
            return NormalJumps(_num(d, "mean", where), _num(d, "stdev", where))
        if variant == "kou":
            _check_keys(d, {"variant", "upProb", "upRate", "downRate"}, where)
            return KouJumps(
                _num(d, "upProb", where), _num(d, "upRate", where), _num(d, "downRate", where)
            )
        if variant == "none":
            _check_keys(d, {"variant"}, where)
            return NoJumps()
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.variant: expected Normal, Kou or None, got {d.get('variant')!r}")


def _build_subordinator(d, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping")
    variant = str(d.get("variant", "")).lower()
    try:
        if variant == "gammaou":
            _check_keys(d, {"variant", "shape", "rate"}, where)
            return GammaOuSubordinator(_num(d, "shape", where), _num(d, "rate", where))
        if variant == "inversegaussian":
            _check_keys(d, {"variant", "delta", "gamma"}, where)
            return InverseGaussianSubordinator(_num(d, "delta", where), _num(d, "gamma", where))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(
        f"{where}.variant: expected GammaOu or InverseGaussian, got {d.get('variant')!r}"
    )


def _build_base_levy(d, where: str) -> BaseLevy:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping")
    _check_keys(d, {"diffusionVol", "jumpIntensity", "jumpLaw"}, where)
    jumps = _build_jump_law(d["jumpLaw"], f"{where}.jumpLaw") if "jumpLaw" in d else NoJumps()
    try:
        return BaseLevy(
            diffusion_vol=_num(d, "diffusionVol", where, required=False, default=1.0),
            jump_intensity=_num(d, "jumpIntensity", where, required=False, default=0.0),
            jumps=jumps,
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _build_heston(d: dict, where: str) -> Heston:
    _check_keys(d, {"variant", "meanReversion", "longRunVar", "volOfVol", "correlation"}, where)
    try:
        return Heston(
            mean_reversion=_num(d, "meanReversion", where),
            long_run_var=_num(d, "longRunVar", where),
            vol_of_vol=_num(d, "volOfVol", where),
            correlation=_num(d, "correlation", where),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def build_model(d: dict, where: str = "model") -> ModelSpec:
    variant = str(d.get("variant", "")).lower()
    try:
        if variant == "heston":
            return _build_heston(d, where)
        if variant == "bates":
            _check_keys(d, {"variant", "heston", "jumpIntensity", "jumpLaw"}, where)
            return Bates(
                heston=_build_heston({"variant": "heston", **d.get("heston", {})}, f"{where}.heston"),
                jump_intensity=_num(d, "jumpIntensity", where),
                jumps=_build_jump_law(d.get("jumpLaw", {"variant": "None"}), f"{where}.jumpLaw"),
            )
        if variant == "turbobates":
            _check_keys(d, {"variant", "heston", "baseIntensity", "varIntensity", "jumpLaw"}, where)
            return TurboBates(
                heston=_build_heston({"variant": "heston", **d.get("heston", {})}, f"{where}.heston"),
                base_intensity=_num(d, "baseIntensity", where),
                var_intensity=_num(d, "varIntensity", where),
                jumps=_build_jump_law(d.get("jumpLaw", {"variant": "None"}), f"{where}.jumpLaw"),
            )
        if variant == "bns":
            _check_keys(d, {"variant", "decay", "leverage", "bdlpCumulant"}, where)
            if "bdlpCumulant" not in d:
                raise ConfigError(f"{where}: missing required field 'bdlpCumulant'")
            return Bns(
                decay=_num(d, "decay", where),
                leverage=_num(d, "leverage", where),
                bdlp=_build_subordinator(d["bdlpCumulant"], f"{where}.bdlpCumulant"),
            )
        if variant == "outclevy":
            _check_keys(d, {"variant", "decay", "subordinatorCumulant", "baseLevyCumulant"}, where)
            for key in ("subordinatorCumulant", "baseLevyCumulant"):
                if key not in d:
                    raise ConfigError(f"{where}: missing required field '{key}'")
            return OuTcLevy(
                decay=_num(d, "decay", where),
                subordinator=_build_subordinator(
                    d["subordinatorCumulant"], f"{where}.subordinatorCumulant"
                ),
                base=_build_base_levy(d["baseLevyCumulant"], f"{where}.baseLevyCumulant"),
            )
        if variant == "cirtclevy":
            _check_keys(d, {"variant", "meanReversion", "longRun", "volOfVol", "baseLevyCumulant"}, where)
            if "baseLevyCumulant" not in d:
                raise ConfigError(f"{where}: missing required field 'baseLevyCumulant'")
            return CirTcLevy(
                mean_reversion=_num(d, "meanReversion", where),
                long_run=_num(d, "longRun", where),
                vol_of_vol=_num(d, "volOfVol", where),
                base=_build_base_levy(d["baseLevyCumulant"], f"{where}.baseLevyCumulant"),
            )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.variant: unknown model variant {d.get('variant')!r}")


def build_contract(d: dict, where: str = "contract") -> ContractSpec:
    _check_keys(
        d, {"spot", "initialVar", "rate", "dividendYield", "strike", "maturity", "payoff"}, where
    )
    if "payoff" not in d:
        raise ConfigError(f"{where}: missing required field 'payoff'")
    try:
        payoff = PayoffKind.parse(str(d["payoff"]))
    except ValueError as exc:
        raise ConfigError(f"{where}.payoff: {exc}") from exc
    try:
        return ContractSpec(
            spot=_num(d, "spot", where),
            initial_var=_num(d, "initialVar", where),
            rate=_num(d, "rate", where),
            dividend_yield=_num(d, "dividendYield", where, required=False, default=0.0),
            strike=_num(d, "strike", where, required=False, default=1.0),
            maturity=_num(d, "maturity", where),
            payoff=payoff,
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def build_contour(d: dict | None, where: str = "contour") -> ContourConfig:
    if d is None:
        return ContourConfig()
    _check_keys(d, {"abscissa", "halfWidth", "nodes", "rule"}, where)
    rule = d.get("rule", "gauss-legendre")
    try:
        return ContourConfig(
            abscissa=_auto_or_num(d, "abscissa", where),
            half_width=_auto_or_num(d, "halfWidth", where),
            nodes=_int(d, "nodes", where, required=False, default=2048),
            rule=str(rule),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def build_solver(d: dict | None, where: str = "solver") -> SolverConfig:
    if d is None:
        return SolverConfig()
    _check_keys(d, {"relTol", "absTol", "maxSteps", "initialStep"}, where)
    try:
        return SolverConfig(
            rel_tol=_num(d, "relTol", where, required=False, default=1e-10),
            abs_tol=_num(d, "absTol", where, required=False, default=1e-12),
            max_steps=_int(d, "maxSteps", where, required=False, default=1_000_000),
            initial_step=_num(d, "initialStep", where, required=False, default=None),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def build_sim(d: dict | None, where: str = "sim") -> SimConfig | None:
    if d is None:
        return None
    _check_keys(d, {"nPaths", "nSteps", "seed", "scheme", "antithetic"}, where)
    if "seed" not in d:
        raise ConfigError(f"{where}: missing required field 'seed' (no wall-clock seeding)")
    antithetic = d.get("antithetic", True)
    if not isinstance(antithetic, bool):
        raise ConfigError(f"{where}.antithetic: expected a boolean")
    scheme = d.get("scheme")
    try:
        return SimConfig(
            seed=_int(d, "seed", where),
            n_paths=_int(d, "nPaths", where, required=False, default=100_000),
            n_steps=_int(d, "nSteps", where, required=False, default=1000),
            scheme=None if scheme is None else str(scheme),
            antithetic=antithetic,
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_job_config(data: dict) -> JobConfig:
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a mapping")
    allowed = {"model", "contract", "contour", "solver", "sim", "strikes", "output", "outPath"}
    _check_keys(data, allowed, "config")
    model = build_model(_section(data, "model", required=True), "model")
    contract = build_contract(_section(data, "contract", required=True), "contract")
    contour = build_contour(_section(data, "contour", required=False), "contour")
    solver = build_solver(_section(data, "solver", required=False), "solver")
    sim = build_sim(_section(data, "sim", required=False), "sim")

    strikes = None
    if "strikes" in data:
        raw = data["strikes"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("config.strikes: expected a nonempty list of numbers")
        try:
            strikes = tuple(float(x) for x in raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config.strikes: {exc}") from exc

    output = data.get("output", "table")
    if output not in ("table", "csv", "jsonl"):
        raise ConfigError(f"config.output: expected table, csv or jsonl, got {output!r}")
    out_path = data.get("outPath")
    if out_path is not None and not isinstance(out_path, str):
        raise ConfigError("config.outPath: expected a string path")
    return JobConfig(model, contract, contour, solver, sim, strikes, output, out_path)


def load_job_config(path: str) -> JobConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return parse_job_config(data)


# ---------------------------------------------------------------------------
# Serialization (config round-trip)
# ---------------------------------------------------------------------------

def _jump_law_dict(law) -> dict:
    if isinstance(law, NormalJumps):
        return {"variant": "Normal", "mean": law.mean, "stdev": law.stdev}
    if isinstance(law, KouJumps):
        return {
            "variant": "Kou",
            "upProb": law.up_prob,
            "upRate": law.up_rate,
            "downRate": law.down_rate,
        }
    return {"variant": "None"}


def _subordinator_dict(sub) -> dict:
    if isinstance(sub, GammaOuSubordinator):
        return {"variant": "GammaOu", "shape": sub.shape, "rate": sub.rate}
    if isinstance(sub, InverseGaussianSubordinator):
        return {"variant": "InverseGaussian", "delta": sub.delta, "gamma": sub.gamma}
    if isinstance(sub, CustomSubordinator):
        raise ConfigError("custom subordinators cannot be serialized to config form")
    raise ConfigError(f"unknown subordinator {sub!r}")


def _base_levy_dict(base: BaseLevy) -> dict:
    return {
        "diffusionVol": base.diffusion_vol,
        "jumpIntensity": base.jump_intensity,
        "jumpLaw": _jump_law_dict(base.jumps),
    }


def _heston_dict(h: Heston) -> dict:
    return {
        "meanReversion": h.mean_reversion,
        "longRunVar": h.long_run_var,
        "volOfVol": h.vol_of_vol,
        "correlation": h.correlation,
    }


def model_to_dict(model: ModelSpec) -> dict:
    if isinstance(model, Heston):
        return {"variant": "Heston", **_heston_dict(model)}
    if isinstance(model, Bates):
        return {
            "variant": "Bates",
            "heston": _heston_dict(model.heston),
            "jumpIntensity": model.jump_intensity,
            "jumpLaw": _jump_law_dict(model.jumps),
        }
    if isinstance(model, TurboBates):
        return {
            "variant": "TurboBates",
            "heston": _heston_dict(model.heston),
            "baseIntensity": model.base_intensity,
            "varIntensity": model.var_intensity,
            "jumpLaw": _jump_law_dict(model.jumps),
        }
    if isinstance(model, Bns):
        return {
            "variant": "BNS",
            "decay": model.decay,
            "leverage": model.leverage,
            "bdlpCumulant": _subordinator_dict(model.bdlp),
        }
    if isinstance(model, OuTcLevy):
        return {
            "variant": "OuTcLevy",
            "decay": model.decay,
            "subordinatorCumulant": _subordinator_dict(model.subordinator),
            "baseLevyCumulant": _base_levy_dict(model.base),
        }
    if isinstance(model, CirTcLevy):
        return {
            "variant": "CirTcLevy",
            "meanReversion": model.mean_reversion,
            "longRun": model.long_run,
            "volOfVol": model.vol_of_vol,
            "baseLevyCumulant": _base_levy_dict(model.base),
        }
    raise ConfigError(f"unknown model {model!r}")


def job_to_dict(cfg: JobConfig) -> dict:
    out: dict = {
        "model": model_to_dict(cfg.model),
        "contract": {
            "spot": cfg.contract.spot,
            "initialVar": cfg.contract.initial_var,
            "rate": cfg.contract.rate,
            "dividendYield": cfg.contract.dividend_yield,
            "strike": cfg.contract.strike,
            "maturity": cfg.contract.maturity,
            "payoff": cfg.contract.payoff.value,
        },
        "contour": {
            "abscissa": "auto" if cfg.contour.abscissa is None else cfg.contour.abscissa,
            "halfWidth": "auto" if cfg.contour.half_width is None else cfg.contour.half_width,
            "nodes": cfg.contour.nodes,
            "rule": cfg.contour.rule,
        },
        "solver": {
            "relTol": cfg.solver.rel_tol,
            "absTol": cfg.solver.abs_tol,
            "maxSteps": cfg.solver.max_steps,
        },
        "output": cfg.output,
    }
    if cfg.solver.initial_step is not None:
        out["solver"]["initialStep"] = cfg.solver.initial_step
    if cfg.sim is not None:
        out["sim"] = {
            "nPaths": cfg.sim.n_paths,
            "nSteps": cfg.sim.n_steps,
            "seed": cfg.sim.seed,
            "antithetic": cfg.sim.antithetic,
        }
        if cfg.sim.scheme is not None:
            out["sim"]["scheme"] = cfg.sim.scheme
    if cfg.strikes is not None:
        out["strikes"] = list(cfg.strikes)
    if cfg.out_path is not None:
        out["outPath"] = cfg.out_path
    return out


# ---------------------------------------------------------------------------
# Record rendering
# ---------------------------------------------------------------------------

def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _render(headers: list[str], json_keys: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(headers)]
        lines += [",".join(_fmt_value(v) for v in row) for row in rows]
        return "\n".join(lines) + "\n"
    if fmt == "jsonl":
        lines = []
        for row in rows:
            parts = []
            for key, v in zip(json_keys, row):
                if v is None:
                    continue
                if isinstance(v, bool):
                    parts.append(f'"{key}": {"true" if v else "false"}')
                elif isinstance(v, float):
                    parts.append(f'"{key}": {v:.17g}')
                elif isinstance(v, int):
                    parts.append(f'"{key}": {v}')
                else:
                    parts.append(f'"{key}": "{v}"')
            lines.append("{" + ", ".join(parts) + "}")
        return "\n".join(lines) + "\n"
    # table
    cells = [[_fmt_value(v) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _warn_feller(model: ModelSpec) -> None:
    heston = None
    if isinstance(model, Heston):
        heston = model
    elif isinstance(model, (Bates, TurboBates)):
        heston = model.heston
    if heston is not None and not heston.feller_satisfied:
        print(
            "warning: Feller condition violated (volOfVol^2 >= 2*meanReversion*longRunVar); "
            "the variance can touch zero but pricing remains well-defined",
            file=sys.stderr,
        )
    if isinstance(model, CirTcLevy) and model.vol_of_vol**2 >= 2 * model.mean_reversion * model.long_run:
        print(
            "warning: Feller condition violated for the activity rate; "
            "pricing remains well-defined",
            file=sys.stderr,
        )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_price(cfg: JobConfig, fmt: str, out_path: str | None, threads: int) -> int:
    _warn_feller(cfg.model)
    strikes = list(cfg.strikes) if cfg.strikes else [cfg.contract.strike]
    results = price_strikes(
        cfg.contract, cfg.model, strikes, cfg.contour, cfg.solver, threads=threads
    )
    name = model_name(cfg.model)
    kind = cfg.contract.payoff
    ks = sorted(strikes) if kind.is_average_price else [cfg.contract.strike]
    rows = [
        [name, kind.value, float(k), cfg.contract.maturity, r.price, r.error_estimate, r.abscissa_used]
        for k, r in zip(ks, results)
    ]
    headers = ["model", "payoff", "K", "T", "price", "err", "abscissa"]
    json_keys = ["model", "payoff", "K", "T", "price", "errorEstimate", "abscissa"]
    _emit(_render(headers, json_keys, rows, fmt), out_path)
    return 0


def _parse_grid(spec: str) -> list[complex]:
    try:
        if ":" in spec:
            lo, hi, count = spec.split(":")
            return [complex(x) for x in np.linspace(float(lo), float(hi), int(count))]
        return [complex(tok) for tok in spec.split(",") if tok]
    except ValueError as exc:
        raise ConfigError(f"--grid: cannot parse {spec!r}: {exc}") from exc


def cmd_cumulant(cfg: JobConfig, grid: str, fmt: str, out_path: str | None) -> int:
    _warn_feller(cfg.model)
    us = _parse_grid(grid)
    kind = cfg.contract.payoff
    kappa = cumulant_average_price if kind.is_average_price else cumulant_average_strike
    rows = []
    for u in us:
        try:
            k = kappa(u, cfg.contract, cfg.model, cfg.solver)
            rows.append([u.real, u.imag, complex(k).real, complex(k).imag, False])
        except (BlowUpError, StepUnderflowError):
            rows.append([u.real, u.imag, None, None, True])
    headers = ["u_re", "u_im", "kappa_re", "kappa_im", "blowup"]
    _emit(_render(headers, headers, rows, fmt), out_path)
    return 0


def cmd_validate(cfg: JobConfig, fmt: str, out_path: str | None, threads: int) -> int:
    _warn_feller(cfg.model)
    if cfg.sim is None:
        raise ConfigError("sim: section with an explicit seed is required for validate")
    strikes = list(cfg.strikes) if cfg.strikes else [cfg.contract.strike]
    kind = cfg.contract.payoff
    name = model_name(cfg.model)

    results = price_strikes(cfg.contract, cfg.model, strikes, cfg.contour, cfg.solver, threads=threads)
    sample = simulate_terminal(cfg.model, cfg.contract, cfg.sim)

    ks = sorted(strikes) if kind.is_average_price else [cfg.contract.strike]
    rows = []
    all_pass = True
    for k, res in zip(ks, results):
        contract_k = ContractSpec(
            spot=cfg.contract.spot,
            initial_var=cfg.contract.initial_var,
            rate=cfg.contract.rate,
            dividend_yield=cfg.contract.dividend_yield,
            strike=float(k),
            maturity=cfg.contract.maturity,
            payoff=kind,
        )
        est = mc_price(cfg.model, contract_k, cfg.sim, sample=sample)
        diff = abs(res.price - est.mean)
        z = diff / est.std_error if est.std_error > 0 else float("inf")
        ok = diff <= 3.0 * est.std_error + res.error_estimate
        all_pass = all_pass and ok
        rows.append(
            [
                name,
                kind.value,
                float(k),
                cfg.contract.maturity,
                res.price,
                res.error_estimate,
                res.abscissa_used,
                est.mean,
                est.std_error,
                z,
                ok,
            ]
        )
    headers = ["model", "payoff", "K", "T", "price", "err", "abscissa", "mcMean", "mcStdError", "z", "agree"]
    json_keys = ["model", "payoff", "K", "T", "price", "errorEstimate", "abscissa", "mcMean", "mcStdError", "z", "agree"]
    _emit(_render(headers, json_keys, rows, fmt), out_path)
    return 0 if all_pass else 4


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", help="YAML job configuration")
    p.add_argument("--format", choices=["table", "csv", "jsonl"], default=None)
    p.add_argument("--out", default=None, help="write records to this path instead of stdout")
    p.add_argument("--threads", type=int, default=1)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="geomasian", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("price", help="transform-price the configured contract"))
    p_cum = sub.add_parser("cumulant", help="dump the payoff cumulant on a grid of arguments")
    _add_common(p_cum)
    p_cum.add_argument("--grid", required=True, help="'lo:hi:n' real sweep or comma-separated complex values")
    _add_common(sub.add_parser("validate", help="compare transform prices against the MC oracle"))
    args = parser.parse_args(argv)

    try:
        cfg = load_job_config(args.config)
        fmt = args.format or cfg.output
        out_path = args.out if args.out is not None else cfg.out_path
        if args.command == "price":
            return cmd_price(cfg, fmt, out_path, max(1, args.threads))
        if args.command == "cumulant":
            return cmd_cumulant(cfg, args.grid, fmt, out_path)
        return cmd_validate(cfg, fmt, out_path, max(1, args.threads))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _PRICING_ERRORS as exc:
        print(f"pricing error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except GeomasianError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def console_entry() -> None:
    sys.exit(main())
