"""Command-line front end: scenario runs, fidelity curves, self-validation.

Exit codes: 0 success, 1 validation failure (bad inputs or a failed
validation check), 2 runtime/semantics error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import NonlinearSemanticsError, ValidationError
from .gates import or_casewise_equivalence, v_matrix
from .noise import ChannelKind, consistency_report, fidelity_f0
from .retrieval import NLE_MODES, RetrievalConfig, run_retrieval

_SQRT2_INV = 1.0 / np.sqrt(2.0)

#: Built-in golden scenarios (see README): single marked value, a known
#: most-significant qubit with a restricted oracle, and seven marked values.
EXAMPLES = {
    1: RetrievalConfig(n=4, marked=(2,)),
    2: RetrievalConfig(n=4, marked=(2,), known_bits=(4,)),
    3: RetrievalConfig(n=4, marked=(2, 5, 8, 10, 11, 13, 15)),
}

_CONFIG_KEYS = ("n", "patterns", "marked", "known_bits", "z", "x", "mode", "seed", "out")


def _parse_int_list(text: str):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_values(text: str, width: int):
    """Comma-separated values; width-matching 0/1 tokens are binary."""
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if len(token) == width and set(token) <= {"0", "1"}:
            out.append(int(token, 2))
        else:
            out.append(int(token))
    return out


def parse_scenario_file(path: str) -> dict:
    """Parse the line-oriented ``key = value`` scenario format."""
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
            raw[key] = value
    return raw


def _config_from_raw(raw: dict) -> tuple[RetrievalConfig, str | None]:
    if "n" not in raw:
        raise ValidationError("scenario is missing 'n'")
    n = int(raw["n"])
    known = tuple(_parse_int_list(raw["known_bits"])) if raw.get("known_bits") else ()
    width = n - len(known)
    patterns = None
    if raw.get("patterns") and raw["patterns"].strip().lower() != "all":
        patterns = tuple(_parse_values(raw["patterns"], n))
    marked = tuple(_parse_values(raw["marked"], width)) if raw.get("marked") else ()
    x_values = tuple(_parse_values(raw["x"], n)) if raw.get("x") else None
    z = _parse_values(raw["z"], n)[0] if raw.get("z") else 0
    config = RetrievalConfig(
        n=n,
        marked=marked,
        patterns=patterns,
        known_bits=known,
        z=z,
        x_values=x_values,
        nle_mode=raw.get("mode", "or"),
        seed=int(raw.get("seed", 0)),
    )
    return config, raw.get("out")


def cmd_run(args) -> int:
    if args.example is not None:
        base = EXAMPLES[args.example]
        raw = {
            "n": str(base.n),
            "marked": ",".join(str(v) for v in base.marked),
            "known_bits": ",".join(str(q) for q in base.known_bits),
        }
    elif args.config:
        raw = parse_scenario_file(args.config)
    else:
        raw = {}
    for key in ("n", "patterns", "marked", "known_bits", "z", "x", "mode", "seed"):
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    config, out_path = _config_from_raw(raw)
    out_path = args.out or out_path
    outcome = run_retrieval(config)
    for line in outcome.transcript:
        print(line)
    if out_path:
        payload = {
            "flag": outcome.flag_bit,
            "register_value": outcome.register_value,
            "register": None
            if outcome.register_value is None
            else format(outcome.register_value, f"0{config.n}b"),
            "sweeps": outcome.sweep_count_used,
            "disentangled_after": outcome.disentangled_after,
            "used_fallback": outcome.used_fallback,
            "params": vars(outcome.params).copy() if outcome.params else None,
        }
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def emit_fidelity_csv(kind: ChannelKind, n: int, eta_steps: int, alpha, beta, stream) -> None:
    """Write the (eta, F0) curve as CSV with 12 significant digits."""
    if eta_steps < 2:
        raise ValidationError("eta-steps must be at least 2")
    stream.write("eta,fidelity\n")
    for eta in np.linspace(0.0, 1.0, eta_steps):
        value = fidelity_f0(kind, float(eta), n, alpha, beta)
        stream.write(f"{eta:.12g},{value:.12g}\n")


def cmd_noise(args) -> int:
    kind = ChannelKind(args.channel)
    alpha = args.alpha if args.alpha is not None else _SQRT2_INV
    beta = args.beta if args.beta is not None else _SQRT2_INV
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            emit_fidelity_csv(kind, args.n, args.eta_steps, alpha, beta, fh)
    else:
        emit_fidelity_csv(kind, args.n, args.eta_steps, alpha, beta, sys.stdout)
    return 0


def cmd_validate(args) -> int:
    failures = 0

    def report(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        print(f"{name}: {status}{suffix}")
        if not ok:
            failures += 1

    v = v_matrix(_SQRT2_INV, _SQRT2_INV)
    resid = float(np.abs(v.conj().T @ v - np.eye(2)).sum(axis=1).max())
    ok = resid > 0.5
    print(f"V non-unitary: {'CONFIRMED' if ok else 'NOT CONFIRMED'} (inf-norm residual {resid:.6g})")
    if not ok:
        failures += 1

    rng = np.random.default_rng(11)
    worst = 0.0
    from .gates import m_matrix, pi_matrix  # local import keeps startup cheap

    for _ in range(1000):
        raw = rng.normal(size=2) + 1j * rng.normal(size=2)
        a, b = raw / np.linalg.norm(raw)
        for gamma in (1, -1, 1j, -1j):
            for sign in (1, -1):
                for mat in (m_matrix(a, b, gamma, sign), pi_matrix(a, b, gamma, sign)):
                    worst = max(worst, float(np.abs(mat.conj().T @ mat - np.eye(2)).max()))
    report("M/Pi unitarity (8 combos x 1000 random)", worst <= 1e-12, f"max residual {worst:.3g}")

    for check in consistency_report():
        report(f"noise-table consistency: {check.channel}: {check.check}", check.ok,
               f"residual {check.residual:.3g}")

    cases, diff = or_casewise_equivalence(exhaustive_max_n=4, random_cases=0)
    report("NLE or/casewise equivalence (n<=4 exhaustive)", diff <= 1e-12,
           f"{cases} cases, max diff {diff:.3g}")
    cases, diff = or_casewise_equivalence(exhaustive_max_n=0, random_cases=1000, random_max_n=8)
    report("NLE or/casewise equivalence (n<=8 randomized)", diff <= 1e-12,
           f"{cases} cases, max diff {diff:.3g}")

    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qamsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a retrieval scenario")
    run.add_argument("--example", type=int, choices=sorted(EXAMPLES))
    run.add_argument("--config", help="scenario file (key = value lines)")
    run.add_argument("--n", help="register qubit count")
    run.add_argument("--patterns", help="stored patterns ('all' or comma list)")
    run.add_argument("--marked", help="marked values (ints or binary strings)")
    run.add_argument("--known-bits", dest="known_bits", help="known qubit indices")
    run.add_argument("--z", help="source basis state")
    run.add_argument("--x", help="sought values override")
    run.add_argument("--mode", choices=NLE_MODES, help="nle step implementation")
    run.add_argument("--seed", help="rng seed")
    run.add_argument("--out", help="write a JSON result file")
    run.set_defaults(func=cmd_run)

    noise = sub.add_parser("noise", help="emit an (eta, fidelity) CSV curve")
    noise.add_argument("--channel", required=True, choices=[k.value for k in ChannelKind])
    noise.add_argument("--n", type=int, required=True)
    noise.add_argument("--eta-steps", dest="eta_steps", type=int, default=101)
    noise.add_argument("--alpha", type=float)
    noise.add_argument("--beta", type=float)
    noise.add_argument("--out", help="CSV path (default: stdout)")
    noise.set_defaults(func=cmd_noise)

    validate = sub.add_parser("validate", help="run the self-check suite")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NonlinearSemanticsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
