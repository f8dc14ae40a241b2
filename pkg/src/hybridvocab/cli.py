"""Command line pipeline: profile -> build-static -> select -> evaluate -> simulate -> report.

Exit codes: 0 ok, 2 config error (also argparse usage errors), 3 parse error,
4 integrity error (including a violated tolerance bound), 5 data error.

``HYBRIDVOCAB_CONFIG`` may name a JSON file whose keys (``tokenizer``,
``corpus``, ``tau``, ``blocks``, ``keep``, ``out_dir``, ``format``,
``vocab_size``) become defaults for the matching flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import offload, profiler, selector, static, subhead
from .errors import ConfigError, DataError, HybridVocabError, ParseError
from .evaluate import coverage
from .tokenizer import load_tokenizer
from .tokens import Document

CONFIG_ENV = "HYBRIDVOCAB_CONFIG"


@dataclass
class PipelineConfig:
    tokenizer: str | None = None
    corpus: str | None = None
    tau: list[float] = field(default_factory=lambda: [0.01])
    blocks: str | None = None
    keep: str | None = None
    out_dir: str = "."
    format: str = "text"
    vocab_size: int | None = None


def _env_defaults() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"{CONFIG_ENV} points at missing file {path}") from None
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {path}: {sorted(unknown)}")
    if "tau" in data and not isinstance(data["tau"], list):
        data["tau"] = [data["tau"]]
    return data


# -- output rendering ---------------------------------------------------------

def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows if len(rows) != 1 else rows[0], indent=1, ensure_ascii=False)
    keys = list(dict.fromkeys(k for r in rows for k in r))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue().rstrip("\n")
    if len(rows) == 1:
        width = max(map(len, keys), default=0)
        return "\n".join(f"{k:<{width}}  {_fmt(v)}" for k, v in rows[0].items())
    cells = [[_fmt(r.get(k, "")) for k in keys] for r in rows]
    widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
    out = ["  ".join(k.ljust(w) for k, w in zip(keys, widths))]
    out += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(out)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return ",".join(map(str, v))
    return str(v)


def _emit(rows, args):
    print(render(rows if isinstance(rows, list) else [rows], args.format))


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


# -- helpers ------------------------------------------------------------------

def _tokenizer(args, required=False):
    if args.tokenizer:
        return load_tokenizer(args.tokenizer)
    if required:
        raise ConfigError("--tokenizer is required here")
    return None


def _vocab_size(args, tok):
    if tok is not None:
        return tok.size
    if args.vocab_size:
        return args.vocab_size
    raise ConfigError("pass --tokenizer or --vocab-size so token ids can be validated")


def _parse_ids(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"--ids expects integers, got {text!r}") from None


def _always_keep(args, tok) -> frozenset[int]:
    keep = set(tok.special_tokens) if tok is not None else set()
    if args.keep:
        for item in args.keep.split(","):
            item = item.strip()
            if not item:
                continue
            if item.lstrip("-").isdigit():
                keep.add(int(item))
            elif tok is not None and item in tok.vocab:
                keep.add(tok.vocab[item])
            elif tok is not None:
                # plain text like "\n": keep whatever it encodes to
                keep.update(tok.encode(item.encode().decode("unicode_escape")))
            else:
                raise ConfigError(f"--keep {item!r} is not an id and no tokenizer was given")
    return frozenset(keep)


def _blocks(args):
    if not args.blocks:
        return None
    return frozenset(b.strip() for b in args.blocks.split(",") if b.strip())


def _corpus(args, tok):
    if not args.corpus:
        raise ConfigError("--corpus is required")
    if not Path(args.corpus).exists():
        raise ConfigError(f"corpus file {args.corpus} does not exist")
    return profiler.iter_jsonl_documents(args.corpus, tok)


# -- subcommands --------------------------------------------------------------

def cmd_profile(args):
    tok = _tokenizer(args)
    n = _vocab_size(args, tok)
    p = profiler.profile(_corpus(args, tok), n)
    if p.M == 0:
        raise DataError("empty corpus")
    out = Path(args.out_dir) / "profile.json"
    _write_json(out, p.to_json())
    stats = profiler.locality_report(p)
    if args.per_doc:
        _emit([{"doc": s.doc_index, "input_size": s.input_size, "overlap": s.overlap,
                "type_overlap": s.type_overlap} for s in p.per_doc], args)
    _emit(stats.to_json(), args)
    return 0


def _load_required(loader, path, what):
    if not path:
        raise ConfigError(f"--{what} is required")
    if not Path(path).exists():
        raise ConfigError(f"{what} file {path} does not exist")
    return loader(path)


def _tau_tag(tau) -> str:
    return repr(float(tau)).replace(".", "p")


def cmd_build_static(args):
    p = _load_required(profiler.load_profile, args.profile, "profile")
    tok = _tokenizer(args)
    keep = _always_keep(args, tok)
    taus = args.tau
    rows = []
    for tau in taus:
        cfg = static.FilterConfig(
            tau=tau,
            allowed_blocks=_blocks(args),
            keep_byte_fragments=not args.no_byte_fragments,
            always_keep=keep,
            input_filter="per_example" if args.compat_per_example_ia else "corpus",
        )
        sv = static.build_static(p, cfg, tok)
        name = "static.json" if len(taus) == 1 else f"static_tau{_tau_tag(tau)}.json"
        static.save_static(sv, Path(args.out_dir) / name)
        v, v1, v2, t = sv.stage_sizes
        n = p.vocab_size
        rows.append({"tau": tau, "unfiltered": v, "input_aware": v1, "ia+language": v2,
                     "+tolerance": t, "pct_of_vocab": 100 * t / n, "pruned_df_sum": sv.pruned_df_sum,
                     "file": name})
    _emit(rows, args)
    return 0


def _select_inputs(args, tok) -> list[list[int]]:
    if args.ids is not None:
        return [_parse_ids(args.ids)]
    if args.text is not None:
        return [_require_tok(tok).encode(args.text, 0)]
    if args.inputs:
        out = []
        with open(args.inputs, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ParseError(e.msg, f"{args.inputs}:{lineno}:{e.colno}") from None
                idx = len(out)
                if isinstance(rec, dict) and "input_ids" in rec:
                    out.append(list(rec["input_ids"]))
                elif isinstance(rec, dict) and "input" in rec:
                    out.append(_require_tok(tok).encode(rec["input"], idx))
                else:
                    raise ParseError("need input or input_ids", f"{args.inputs}:{lineno}")
        return out
    raise ConfigError("give one of --text, --ids or --inputs")


def _require_tok(tok):
    if tok is None:
        raise ConfigError("text input needs --tokenizer")
    return tok


def cmd_select(args):
    sv = _load_required(static.load_static, args.static, "static")
    tok = _tokenizer(args)
    n = sv.vocab_size or _vocab_size(args, tok)
    plans = [selector.select(ids, sv, n) for ids in _select_inputs(args, tok)]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if len(plans) == 1:
        selector.save_plan(plans[0], out_dir / "plan.json")
    else:
        with open(out_dir / "plans.jsonl", "w", encoding="utf-8") as fh:
            for plan in plans:
                fh.write(json.dumps(plan.to_json()) + "\n")
        if args.union:
            selector.save_plan(selector.union_plans(plans, sv), out_dir / "plan_union.json")
    rep = selector.batch_stats(plans)
    if args.format == "text":
        print(rep.line)
    else:
        _emit(rep.to_json(), args)
    return 0


def cmd_evaluate(args):
    sv = _load_required(static.load_static, args.static, "static")
    tok = _tokenizer(args)
    n = sv.vocab_size or _vocab_size(args, tok)
    rep = coverage(_corpus(args, tok), sv, n, profiling=args.profiling)
    _emit(rep.to_json(), args)
    return 0


def cmd_simulate(args):
    hw = offload.load_hardware(args.hardware) if args.hardware else offload.DEFAULT_HARDWARE
    if args.plan:
        plan_size = len(_load_required(selector.load_plan, args.plan, "plan"))
    elif args.plan_size is not None:
        plan_size = args.plan_size
    else:
        raise ConfigError("give --plan or --plan-size")
    tl = offload.simulate(hw, plan_size, args.d, args.dtype_bytes, args.prompt_len, args.flops_per_token)
    row = {"plan_size": plan_size, **tl.to_json(),
           "breakeven_rows": offload.breakeven_rows(hw, args.d, args.dtype_bytes, args.prompt_len,
                                                    args.flops_per_token)}
    if args.full_vocab_size:
        mem = subhead.memory_report(args.full_vocab_size, args.d, args.dtype_bytes, plan_size)
        row.update(mem.to_json())
    _emit(row, args)
    return 0


def cmd_report(args):
    rows = {}
    if args.profile:
        p = _load_required(profiler.load_profile, args.profile, "profile")
        rows.update({f"profile.{k}": v for k, v in profiler.locality_report(p).to_json().items()})
    if args.static:
        sv = _load_required(static.load_static, args.static, "static")
        rows.update({"static.tau": sv.tau, "static.stage_sizes": list(sv.stage_sizes),
                     "static.size": len(sv.members), "static.pruned_df_sum": sv.pruned_df_sum})
    if args.plans:
        plans = []
        with open(args.plans, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if line.strip():
                    try:
                        plans.append(selector.SelectionPlan.from_json(json.loads(line)))
                    except json.JSONDecodeError as e:
                        raise ParseError(e.msg, f"{args.plans}:{lineno}:{e.colno}") from None
        rep = selector.batch_stats(plans)
        rows.update({f"plans.{k}": v for k, v in rep.to_json().items()})
        if args.d:
            mem = subhead.memory_report(rep.full_vocab_size, args.d, args.dtype_bytes,
                                        round(rep.n_static + rep.mean_dynamic))
            rows.update({f"memory.{k}": v for k, v in mem.to_json().items()})
    if not rows:
        raise ConfigError("report needs at least one of --profile, --static, --plans")
    _emit(rows, args)
    return 0


# -- parser -------------------------------------------------------------------

def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    d = {**PipelineConfig().__dict__, **(defaults or {})}
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tokenizer", default=d["tokenizer"], help="tokenizer JSON file")
    common.add_argument("--vocab-size", type=int, default=d["vocab_size"],
                        help="vocabulary size when working from pre-tokenized ids without a tokenizer")
    common.add_argument("--out-dir", default=d["out_dir"])
    common.add_argument("--format", choices=("text", "json", "csv"), default=d["format"])

    ap = argparse.ArgumentParser(prog="hybridvocab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("profile", parents=[common], help="profile a JSONL corpus")
    s.add_argument("--corpus", default=d["corpus"])
    s.add_argument("--per-doc", action="store_true", help="also print per-document overlap")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("build-static", parents=[common], help="build the static task vocabulary")
    s.add_argument("--profile", default=os.path.join(d["out_dir"], "profile.json"))
    s.add_argument("--tau", type=float, nargs="+", default=d["tau"])
    s.add_argument("--blocks", default=d["blocks"], help="comma-separated allowed Unicode blocks")
    s.add_argument("--keep", default=d["keep"], help="comma-separated ids or tokens never pruned")
    s.add_argument("--no-byte-fragments", action="store_true")
    s.add_argument("--compat-per-example-ia", action="store_true",
                   help="input-aware filter removes a token only where that example's input has it")
    s.set_defaults(func=cmd_build_static)

    s = sub.add_parser("select", parents=[common], help="compute selection plans")
    s.add_argument("--static", default=os.path.join(d["out_dir"], "static.json"))
    g = s.add_mutually_exclusive_group()
    g.add_argument("--text")
    g.add_argument("--ids")
    g.add_argument("--inputs", help="JSONL with input or input_ids per line")
    s.add_argument("--union", action="store_true", help="also write the batch union plan")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("evaluate", parents=[common], help="coverage of a static vocabulary")
    s.add_argument("--static", default=os.path.join(d["out_dir"], "static.json"))
    s.add_argument("--corpus", default=d["corpus"])
    s.add_argument("--profiling", action="store_true",
                   help="corpus is the profiling corpus: enforce impacted fraction <= tau")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("simulate", parents=[common], help="transfer/prefill overlap timeline")
    s.add_argument("--hardware", help="hardware model JSON (default: illustrative profile)")
    s.add_argument("--plan")
    s.add_argument("--plan-size", type=int)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--dtype-bytes", type=int, default=2)
    s.add_argument("--prompt-len", type=int, required=True)
    s.add_argument("--flops-per-token", type=float, required=True)
    s.add_argument("--full-vocab-size", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("report", parents=[common], help="summarize pipeline artifacts")
    s.add_argument("--profile")
    s.add_argument("--static")
    s.add_argument("--plans")
    s.add_argument("--d", type=int)
    s.add_argument("--dtype-bytes", type=int, default=2)
    s.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser(_env_defaults()).parse_args(argv)
        return args.func(args)
    except HybridVocabError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
