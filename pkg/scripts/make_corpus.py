"""Regenerate the bundled synthetic corpus under src/reqcomplexity/data/corpus.

Eight requirement documents of varying size are written from seeded
templates; each is extracted to an integration task and a synthetic effort
value is produced as an affine function of its Integration GE plus seeded
Gaussian noise. Effort here is synthetic by construction -- it exercises the
pipeline and says nothing about real integration effort.

    python scripts/make_corpus.py
"""

import csv
import random
from pathlib import Path

import numpy as np

from reqcomplexity.extract import build_layered_graph, layered_task, parse_requirements, read_lexicon
from reqcomplexity.tasks import integration_level_metrics

OUT = Path(__file__).resolve().parents[1] / "src" / "reqcomplexity" / "data" / "corpus"
SEED = 20240601
EFFORT_INTERCEPT = 120.0
EFFORT_SLOPE = 15.0
NOISE_FRACTION = 0.1  # noise sd as a fraction of the spread of the noiseless effort

COMPONENTS = [
    "actuator", "controller", "sensor", "power bus", "strut", "battery",
    "radio", "camera", "gimbal", "motor", "frame", "operator",
]
VERBS = ["monitor", "drive", "power", "report to", "protect", "calibrate", "isolate"]
SIZES = [4, 6, 7, 9, 11, 13, 15, 18]


def make_document(rng: random.Random, size: int) -> str:
    ids: list[str] = []
    lines = []
    tops = max(2, size // 4)
    for k in range(size):
        if k < tops:
            req_id = str(k + 1)
        else:
            parent = rng.choice(ids)
            siblings = sum(1 for i in ids if i.rpartition(".")[0] == parent)
            req_id = f"{parent}.{siblings + 1}"
        a, b = rng.sample(COMPONENTS, 2)
        text = f"The {a} shall {rng.choice(VERBS)} the {b}"
        if ids and rng.random() < 0.35:
            text += f" (see {rng.choice(ids)})"
        ids.append(req_id)
        lines.append(f"{req_id} {text}.")
    return "\n".join(sorted(lines, key=lambda s: [int(x) for x in s.split()[0].split(".")])) + "\n"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    (OUT / "lexicon.txt").write_text("\n".join(COMPONENTS) + "\n", encoding="utf-8")
    lexicon = read_lexicon((OUT / "lexicon.txt").read_text(encoding="utf-8"))
    ge = []
    names = []
    for idx, size in enumerate(SIZES, 1):
        name = f"task{idx:02d}"
        doc = make_document(rng, size)
        (OUT / f"{name}.txt").write_text(doc, encoding="utf-8")
        parsed = parse_requirements(doc, lexicon)
        task = layered_task(build_layered_graph(parsed.records), name)
        ge.append(integration_level_metrics(task)["Integration GE"])
        names.append(name)
    signal = EFFORT_INTERCEPT + EFFORT_SLOPE * np.array(ge)
    noise = np.random.default_rng(SEED).normal(0.0, NOISE_FRACTION * np.ptp(signal), len(signal))
    with open(OUT / "effort.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "effort_s"])
        for name, value in zip(names, signal + noise):
            writer.writerow([name, f"{value:.3f}"])


if __name__ == "__main__":
    main()
