"""Closed-form parameter counts for every variant, computed without building a model.

Usage:
    python -m scripts.param_counts --vocab-size 120 --num-labels 40
"""
from typing import Dict, List

import typer
from rich.console import Console
from rich.table import Table

from src.core.schemas.ModelConfig import PRESETS

# matrix -> (d_in, d_out) in terms of d_model (d), d_ff (f) and the label count (c)
MATRIX_SHAPES = {
    "W_q": lambda d, f, c: (d, d),
    "W_k": lambda d, f, c: (d, d),
    "W_v": lambda d, f, c: (d, d),
    "W_o": lambda d, f, c: (d, d),
    "W_1": lambda d, f, c: (d, f),
    "W_2": lambda d, f, c: (f, d),
    "classifier": lambda d, f, c: (d, c),
}


def full_count(size: Dict[str, int], vocab_size: int, num_labels: int, max_len: int) -> int:
    d, f, layers = size["d_model"], size["d_ff"], size["num_layers"]
    embeddings = (vocab_size + max_len) * d + 2 * d
    attention = 4 * d * d + 4 * d
    ffn = 2 * d * f + f + d
    norms = 4 * d
    head = d * num_labels + num_labels
    return embeddings + layers * (attention + ffn + norms) + head


def lora_count(size: Dict[str, int], num_labels: int, rank: int, targets: List[str], head: bool) -> int:
    d, f, layers = size["d_model"], size["d_ff"], size["num_layers"]
    total = 0
    for target in dict.fromkeys(targets):
        d_in, d_out = MATRIX_SHAPES[target](d, f, num_labels)
        copies = 1 if target == "classifier" else layers
        total += copies * rank * (d_in + d_out)
    if head:
        total += d * num_labels + num_labels
    return total


def main(
    vocab_size: int = typer.Option(120, "--vocab-size"),
    num_labels: int = typer.Option(40, "--num-labels"),
    max_len: int = typer.Option(16, "--max-len"),
    rank: int = typer.Option(4, "--rank"),
    target: List[str] = typer.Option(["W_q", "W_v"], "--target"),
    head: bool = typer.Option(True, "--head/--no-head"),
):
    table = Table(title=f"parameters (vocab {vocab_size}, {num_labels} labels, max_len {max_len})")
    for column in ("variant", "full", f"LoRA r={rank}", "share"):
        table.add_column(column, justify="left" if column == "variant" else "right")
    for variant, size in PRESETS.items():
        full = full_count(size, vocab_size, num_labels, max_len)
        lora = lora_count(size, num_labels, rank, target, head)
        table.add_row(variant, str(full), str(lora), f"{100 * lora / full:.2f}%")
    Console().print(table)


if __name__ == "__main__":
    typer.run(main)
