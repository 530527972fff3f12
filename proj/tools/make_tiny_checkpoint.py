#!/usr/bin/env python3
"""Writes a tiny random BERT checkpoint plus reference outputs for the tests.

Usage: make_tiny_checkpoint.py OUT_DIR
"""
import json
import sys
from pathlib import Path

import torch
from transformers import BertConfig, BertModel, BertTokenizer

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
WORDS = [
    "the", "a", "is", "not", "hate", "you", "are", "bad", "good", "day",
    "un", "##able", "##s", "##ing", "play", "run", "cafe", "resume", ",", ".", "!", "?", "#",
    "@", "user", "url", "<", ">", "##ly", "quick", "brown", "fox",
    "ह", "म", "त", "न", "क", "र", "स", "##ह", "##म", "##त", "##न", "##क", "##र", "##स",
    "हम", "तम", "नफरत", "##ो", "##ा",
]
TEXTS = [
    "The quick brown fox!",
    "you are NOT good, unable to play",
    "Café résumé #hate @user",
    "हम तुम नफरत करते हैं",
    "zzz qqq",
    "",
]
GRAD_TEXTS = ["you are not good", "the quick brown fox", "हम तुम नफरत", "unable to play"]
GRAD_TARGETS = [0, 1, 2, 3]
GRAD_TENSORS = [
    "embeddings.word_embeddings.weight",
    "embeddings.position_embeddings.weight",
    "embeddings.LayerNorm.weight",
    "encoder.layer.0.attention.self.query.weight",
    "encoder.layer.0.attention.self.query.bias",
    "encoder.layer.0.attention.self.key.weight",
    "encoder.layer.0.attention.self.value.weight",
    "encoder.layer.1.attention.self.query.weight",
    "encoder.layer.1.attention.self.key.bias",
    "encoder.layer.1.attention.output.dense.weight",
    "encoder.layer.1.intermediate.dense.weight",
    "encoder.layer.1.output.LayerNorm.bias",
    "pooler.dense.weight",
]


def gradient_case(model, tok):
    """Double-precision autograd of mean cross-entropy through a fixed head, dropout off."""
    m = BertModel(model.config).double().eval()
    m.load_state_dict(model.state_dict())
    gen = torch.Generator().manual_seed(11)
    k, h = 4, model.config.hidden_size
    w = (0.5 * torch.randn(k, h, generator=gen)).double()
    b = (0.1 * torch.randn(k, generator=gen)).double()
    enc = tok(GRAD_TEXTS, padding="max_length", truncation=True, max_length=10,
              return_tensors="pt")
    o = m(input_ids=enc["input_ids"], attention_mask=enc["attention_mask"],
          token_type_ids=torch.zeros_like(enc["input_ids"]))
    logits = o.pooler_output @ w.T + b
    loss = torch.nn.functional.cross_entropy(logits, torch.tensor(GRAD_TARGETS))
    loss.backward()
    params = dict(m.named_parameters())
    return {
        "texts": GRAD_TEXTS,
        "targets": GRAD_TARGETS,
        "max_len": 10,
        "classifier_weight": w.reshape(-1).tolist(),
        "classifier_bias": b.tolist(),
        "loss": loss.item(),
        "grads": {n: params[n].grad.reshape(-1).tolist() for n in GRAD_TENSORS},
    }


def main(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    vocab = SPECIALS + WORDS
    vocab += [f"w{i}" for i in range(100 - len(vocab))]
    (out / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    (out / "tokenizer_config.json").write_text(json.dumps({"do_lower_case": True}) + "\n")

    torch.manual_seed(7)
    cfg = BertConfig(
        vocab_size=len(vocab), hidden_size=16, num_hidden_layers=2, num_attention_heads=4,
        intermediate_size=32, max_position_embeddings=40, type_vocab_size=2,
        hidden_act="gelu", layer_norm_eps=1e-12,
    )
    model = BertModel(cfg).eval()
    with torch.no_grad():
        for p in model.parameters():
            p.add_(0.05 * torch.randn_like(p))
    model.save_pretrained(out, safe_serialization=True)

    tok = BertTokenizer(str(out / "vocab.txt"), do_lower_case=True)
    max_len = 12
    refs = []
    for text in TEXTS:
        enc = tok(text, padding="max_length", truncation=True, max_length=max_len,
                  return_tensors="pt")
        with torch.no_grad():
            o = model(input_ids=enc["input_ids"], attention_mask=enc["attention_mask"],
                      token_type_ids=torch.zeros_like(enc["input_ids"]))
        refs.append({
            "text": text,
            "ids": enc["input_ids"][0].tolist(),
            "sequence_output": o.last_hidden_state[0].reshape(-1).tolist(),
            "pooled_output": o.pooler_output[0].tolist(),
        })
    (out / "reference.json").write_text(
        json.dumps({"max_len": max_len, "cases": refs,
                    "gradient_case": gradient_case(model, tok)}, ensure_ascii=False, indent=1) + "\n",
        encoding="utf-8")


if __name__ == "__main__":
    main(Path(sys.argv[1]))
