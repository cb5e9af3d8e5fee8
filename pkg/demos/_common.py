"""Shared helper: make sure the demo dataset exists before a demo runs."""

from datetime import date
from pathlib import Path

DATA_DIR = Path(__file__).parent / "data"


def ensure_dataset(n_equities: int = 8, seed: int = 7) -> Path:
    from ssdfolio.synthetic import write_dataset

    if not (DATA_DIR / "prices.csv").exists():
        print(f"generating demo dataset in {DATA_DIR} ...")
        write_dataset(DATA_DIR, start=date(2017, 3, 17), end=date(2025, 8, 1), n_equities=n_equities, seed=seed)
    return DATA_DIR
