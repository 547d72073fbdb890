"""Fine-tune a small causal LM to answer the association question.

Trains two objectives jointly: cross-entropy on the first answer token
(Yes/No) and mean-squared error from a linear quality head on the last
hidden state against quality_target. The resulting checkpoint directory is
loadable by the service in lm mode; the quality head is saved as a
``quality_head`` submodule so the service picks it up for q.

This is an example, not part of the test surface: it needs torch,
transformers, and a local base checkpoint.

Usage: python3 train_decision_model.py records.jsonl base_ckpt out_dir
"""

from __future__ import annotations

import argparse
import json

import torch
from torch.utils.data import DataLoader
from transformers import AutoModelForCausalLM, AutoTokenizer


def load_records(path: str) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("records", help="training records from build_quality_targets.py")
    parser.add_argument("base", help="local base checkpoint directory")
    parser.add_argument("out", help="output checkpoint directory")
    parser.add_argument("--epochs", type=int, default=1)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--lr", type=float, default=2e-5)
    parser.add_argument("--quality-weight", type=float, default=1.0)
    args = parser.parse_args()

    tokenizer = AutoTokenizer.from_pretrained(args.base, local_files_only=True)
    model = AutoModelForCausalLM.from_pretrained(args.base, local_files_only=True)
    hidden = model.config.hidden_size
    model.quality_head = torch.nn.Linear(hidden, 1)

    yes_id = tokenizer.encode("Yes", add_special_tokens=False)[0]
    no_id = tokenizer.encode("No", add_special_tokens=False)[0]
    records = load_records(args.records)

    def collate(batch: list[dict]) -> dict:
        enc = tokenizer([r["text"] for r in batch], return_tensors="pt",
                        padding=True, truncation=True)
        enc["answer_id"] = torch.tensor(
            [yes_id if r["answer"] == "Yes" else no_id for r in batch])
        enc["quality"] = torch.tensor(
            [r["quality_target"] for r in batch], dtype=torch.float32)
        return enc

    loader = DataLoader(records, batch_size=args.batch_size, shuffle=True,
                        collate_fn=collate)
    optim = torch.optim.AdamW(model.parameters(), lr=args.lr)
    model.train()

    for epoch in range(args.epochs):
        total = 0.0
        for batch in loader:
            out = model(input_ids=batch["input_ids"],
                        attention_mask=batch["attention_mask"],
                        output_hidden_states=True)
            # Last non-padding position per row predicts the answer token.
            last = batch["attention_mask"].sum(dim=1) - 1
            rows = torch.arange(last.shape[0])
            logits = out.logits[rows, last]
            answer_loss = torch.nn.functional.cross_entropy(
                logits, batch["answer_id"])
            states = out.hidden_states[-1][rows, last]
            q = torch.sigmoid(model.quality_head(states)).squeeze(-1)
            quality_loss = torch.nn.functional.mse_loss(q, batch["quality"])
            loss = answer_loss + args.quality_weight * quality_loss
            optim.zero_grad()
            loss.backward()
            optim.step()
            total += float(loss)
        print(f"epoch {epoch}: mean loss {total / max(1, len(loader)):.4f}")

    model.save_pretrained(args.out)
    tokenizer.save_pretrained(args.out)
    print(f"saved checkpoint to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
