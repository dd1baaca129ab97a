#!/usr/bin/env python3
"""Regenerates the deterministic test fixtures under tests/fixtures/.

Run from the repository root:  python3 tools/make_fixtures.py
Every byte is a pure function of the seeds below; the fixtures are checked
in, so rerunning must be a no-op (verified by diff in CI or by hand).
"""
import json
import math
import random
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def zipf_weights(n: int, s: float) -> list[float]:
    return [1.0 / (rank ** s) for rank in range(1, n + 1)]


def zipf_pick(rng: random.Random, weights: list[float]) -> int:
    total = sum(weights)
    x = rng.random() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if x < acc:
            return i
    return len(weights) - 1


def make_catalog_1000() -> None:
    rng = random.Random(20240601)
    genres = [f"g{i:02d}" for i in range(1, 31)]
    languages = [f"l{i:02d}" for i in range(1, 13)]
    producers = [f"p{i:02d}" for i in range(1, 41)]
    # A small filler pool keeps filler document frequency high (low idf), so
    # the tf-idf geometry is dominated by the label tokens: items that share
    # labels land close together, which is what a text embedding of real
    # metadata-derived descriptions looks like.
    fillers = [f"w{i:02d}" for i in range(6)]
    wg = zipf_weights(len(genres), 1.1)
    wl = zipf_weights(len(languages), 1.1)
    wp = zipf_weights(len(producers), 1.1)

    lines = ["id,text,genre,language,producer"]
    for i in range(1, 1001):
        n_genres = 1 + (1 if rng.random() < 0.4 else 0) + (1 if rng.random() < 0.15 else 0)
        item_genres: list[str] = []
        while len(item_genres) < n_genres:
            g = genres[zipf_pick(rng, wg)]
            if g not in item_genres:
                item_genres.append(g)
        language = languages[zipf_pick(rng, wl)]
        producer = producers[zipf_pick(rng, wp)]
        # Genre tokens appear twice (genres dominate how similar two blurbs
        # read); language and producer once; one filler word.
        words = sorted(item_genres) * 2 + [language, producer]
        words.append(fillers[rng.randrange(len(fillers))])
        text = " ".join(words)
        lines.append(
            f"item{i:04d},{text},{'|'.join(sorted(item_genres))},{language},{producer}"
        )
    (FIXTURES / "catalog_1000.csv").write_text("\n".join(lines) + "\n")


def make_sim_fixture() -> None:
    """400 items in 9 well-separated clusters of two tight subclumps each.

    Geometry (4-D): cluster centers on a 3x3 grid with pitch 20, subclump
    centers offset by +/-1 on the last axis (sister distance 2), points
    jittered with sigma=0.01. Every subclump carries its own topic label, so
    a full-coverage selection touches all 18 subclumps.
    """
    rng = random.Random(77001)
    n_topics = 18
    items_per_topic = 400 // n_topics  # 22, remainder spread below
    sizes = [items_per_topic + (1 if t < 400 % n_topics else 0) for t in range(n_topics)]

    centers = []
    for cluster in range(9):
        gx, gy = divmod(cluster, 3)
        for sub in range(2):
            centers.append((20.0 * gx, 20.0 * gy, 0.0, 1.0 if sub == 0 else -1.0))

    rows = []  # (id, topic, vector)
    item = 1
    for topic in range(n_topics):
        cx, cy, cz, cw = centers[topic]
        for _ in range(sizes[topic]):
            vec = (
                cx + rng.gauss(0.0, 0.01),
                cy + rng.gauss(0.0, 0.01),
                cz + rng.gauss(0.0, 0.01),
                cw + rng.gauss(0.0, 0.01),
            )
            rows.append((f"sim{item:04d}", f"t{topic + 1:02d}", vec))
            item += 1
    rng.shuffle(rows)  # interleave topics so index order carries no signal

    catalog = ["id,text,topic"]
    embedding = [f"dim=4 metric=euclidean"]
    for item_id, topic, vec in rows:
        catalog.append(f"{item_id},{topic} item,{topic}")
        embedding.append(item_id + " " + " ".join(f"{x:.9f}" for x in vec))
    (FIXTURES / "sim_catalog.csv").write_text("\n".join(catalog) + "\n")
    (FIXTURES / "sim_embedding.txt").write_text("\n".join(embedding) + "\n")

    sim_config = {
        "K": 200,
        "k": 20,
        "batch": 20,
        "n": 5,
        "q": 0.1,
        "seed": 42,
        "policies": ["random", "isp_recursive"],
        "threads": 1,
    }
    (FIXTURES / "sim.json").write_text(json.dumps(sim_config, indent=2) + "\n")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    make_catalog_1000()
    make_sim_fixture()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
