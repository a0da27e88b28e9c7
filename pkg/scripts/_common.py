"""Shared argument handling for the experiment scripts."""
import argparse
from pathlib import Path

from riclab.harness import write_csv


def parser(doc: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=doc)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    ap.add_argument("--quick", action="store_true", help="smaller sizes for a smoke run")
    return ap


def save(out: str, name: str, rows: list) -> None:
    path = write_csv(Path(out) / name, rows)
    print(f"wrote {path}")
