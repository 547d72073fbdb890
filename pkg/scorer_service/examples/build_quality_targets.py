"""Convert a mined-pairs JSONL file into LM training records.

Input lines carry {"prompt": ..., "label": "Yes"|"No", "iou_target": float};
output lines carry {"text", "answer", "quality_target"} where text is the
rendered prompt with box slots spelled out numerically. Stdlib only, so it
runs anywhere the service runs.

Usage: python3 build_quality_targets.py pairs.jsonl out.jsonl
"""

from __future__ import annotations

import argparse
import json

from scorer_service.lm import render_for_lm
from scorer_service.protocol import parse_score_request


def convert(in_path: str, out_path: str) -> int:
    n = 0
    with open(in_path) as src, open(out_path, "w") as dst:
        for line in src:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            # Route the stored prompt through the wire-protocol parser so the
            # training text matches what the service would score at runtime.
            body = {"template_id": "train", "pairs": [
                {"pair_id": str(n), "prompt": rec["prompt"]},
            ]}
            _tid, pairs = parse_score_request(body, max_batch=1)
            dst.write(json.dumps({
                "text": render_for_lm(pairs[0]),
                "answer": rec["label"],
                "quality_target": float(rec["iou_target"]),
            }, sort_keys=True) + "\n")
            n += 1
    return n


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("pairs", help="mined pairs JSONL")
    parser.add_argument("out", help="output training records JSONL")
    args = parser.parse_args()
    n = convert(args.pairs, args.out)
    print(f"wrote {n} records to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
