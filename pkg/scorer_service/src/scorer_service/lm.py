"""LM-backed scoring: decision-token probability from a local model.

The model is loaded lazily on first use so that the service stays up
(and /v1/health keeps answering) when the checkpoint is missing or
broken; scoring then fails with ModelUnavailable, which the app maps to
HTTP 503.

The expected checkpoint is a small causal LM fine-tuned to answer the
serialized prompt with Yes or No; the association probability is the
renormalized decision-token mass p = P(Yes) / (P(Yes) + P(No)). Box
slots are rendered inline as bracketed feature tuples, since a plain
causal LM has no native slot embedding. No quality head is assumed:
``q`` is None unless the checkpoint ships a regression head named
``quality_head``, which is applied to the final hidden state.
"""

from __future__ import annotations

from .config import ServiceConfig
from .errors import ModelUnavailable
from .protocol import ScorePair


def render_for_lm(pair: ScorePair) -> str:
    """Inline the numeric slots into the prompt text."""
    rendered = pair.text
    for row in list(pair.history) + [pair.candidate]:
        numbers = " ".join(f"{v:.4f}" for v in row)
        rendered = rendered.replace("<box>", f"[{numbers}]", 1)
    return rendered


class LmScorer:
    def __init__(self, cfg: ServiceConfig) -> None:
        self.cfg = cfg
        self._model = None
        self._tokenizer = None
        self._load_error: str | None = None

    def _ensure_loaded(self) -> None:
        if self._model is not None:
            return
        if self._load_error is not None:
            raise ModelUnavailable(self._load_error)
        try:
            import torch  # noqa: F401
            from transformers import AutoModelForCausalLM, AutoTokenizer

            self._tokenizer = AutoTokenizer.from_pretrained(
                self.cfg.model_path, local_files_only=True)
            self._model = AutoModelForCausalLM.from_pretrained(
                self.cfg.model_path, local_files_only=True)
            self._model.eval()
        except Exception as exc:
            self._load_error = f"cannot load model from {self.cfg.model_path!r}: {exc}"
            raise ModelUnavailable(self._load_error) from exc

    def score(self, pairs: list[ScorePair]) -> list[tuple[float, float | None]]:
        self._ensure_loaded()
        import torch

        yes_id = self._tokenizer.encode("Yes", add_special_tokens=False)[0]
        no_id = self._tokenizer.encode("No", add_special_tokens=False)[0]
        out: list[tuple[float, float | None]] = []
        with torch.no_grad():
            for pair in pairs:
                enc = self._tokenizer(render_for_lm(pair), return_tensors="pt")
                result = self._model(**enc, output_hidden_states=True)
                logits = result.logits[0, -1]
                probs = torch.softmax(logits[[yes_id, no_id]], dim=0)
                p = float(probs[0])
                q = None
                head = getattr(self._model, "quality_head", None)
                if head is not None:
                    hidden = result.hidden_states[-1][0, -1]
                    q = float(torch.sigmoid(head(hidden)))
                out.append((min(max(p, 0.0), 1.0), q))
        return out
