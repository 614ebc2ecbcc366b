#!/usr/bin/env python3
"""Regenerates the 25-firm sector fixture under data/.

The fixture matches the reference sector totals: 25 firms, 4 incidents
reported by 3 firms, $580,000 total loss, per-control losses of
5a=325k, 5b=90k, 6b=75k, 6d=75k, 1a=15k and an overall average maturity of
exactly 78% (1287 of 1650 level points).

Checksums use the same canonical form as the C++ library: keys sorted, no
whitespace, losses as integer cents, implicated controls sorted.
"""

import json
import pathlib
import random
import zlib

CONTROLS = ["1a", "2a", "2b", "3a", "3b", "4a", "4b", "5a", "5b", "6a", "6b",
            "6c", "6d", "7a", "7b", "7c", "8a", "8b", "8c", "9a", "9b", "10a"]
LEVELS = ["not_implemented", "partially_implemented", "largely_implemented",
          "fully_implemented"]
FIRMS = 25
TARGET_POINTS = 1287  # 0.78 * 3 * 22 * 25
PERIOD = "2021-01/2023-06"

INCIDENTS = {
    3: [(30_000_00, ["1a", "5a"])],
    11: [(310_000_00, ["5a"]), (90_000_00, ["5b"])],
    19: [(150_000_00, ["6b", "6d"])],
}


def canonical(sub):
    body = {
        "participant_id": sub["participant_id"],
        "maturities": sub["maturities"],
        "incidents": [
            {"implicated": sorted(i["implicated"]),
             "loss_cents": i["loss_cents"],
             "period": i["period"]}
            for i in sub["incidents"]
        ],
    }
    return json.dumps(body, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "data"
    rng = random.Random(20230630)
    grid = [[rng.choice([1, 2, 2, 2, 3, 3, 3]) for _ in CONTROLS]
            for _ in range(FIRMS)]
    # Nudge cells one level at a time until the total hits the target.
    total = sum(map(sum, grid))
    while total != TARGET_POINTS:
        f = rng.randrange(FIRMS)
        c = rng.randrange(len(CONTROLS))
        if total < TARGET_POINTS and grid[f][c] < 3:
            grid[f][c] += 1
            total += 1
        elif total > TARGET_POINTS and grid[f][c] > 0:
            grid[f][c] -= 1
            total -= 1

    out = root / "isao"
    out.mkdir(parents=True, exist_ok=True)
    for f in range(FIRMS):
        incidents = [{"loss_cents": cents, "implicated": impl, "period": PERIOD}
                     for cents, impl in INCIDENTS.get(f, [])]
        sub = {
            "participant_id": f"isao-{f + 1:02d}",
            "maturities": {c: LEVELS[grid[f][i]] for i, c in enumerate(CONTROLS)},
            "incidents": incidents,
        }
        crc = zlib.crc32(canonical(sub)) & 0xFFFFFFFF
        doc = {
            "participant_id": sub["participant_id"],
            "maturities": sub["maturities"],
            "incidents": [
                {"loss_usd": f"{i['loss_cents'] // 100}.{i['loss_cents'] % 100:02d}",
                 "implicated": i["implicated"], "period": i["period"]}
                for i in incidents
            ],
            "checksum": f"{crc:08x}",
        }
        (out / f"firm_{f + 1:02d}.json").write_text(json.dumps(doc, indent=2) + "\n")

    own = root / "own"
    own.mkdir(parents=True, exist_ok=True)
    averages = {c: sum(grid[f][i] for f in range(FIRMS)) / (3 * FIRMS)
                for i, c in enumerate(CONTROLS)}
    (own / "peer_average.json").write_text(json.dumps(
        {"participant_id": "own", "maturities": averages}, indent=2) + "\n")
    (own / "below_30pct.json").write_text(json.dumps(
        {"participant_id": "own",
         "maturities": {c: 0.7 * v for c, v in averages.items()}}, indent=2) + "\n")
    # A discrete-level posture, the common case for a real participant.
    (own / "example_firm.json").write_text(json.dumps(
        {"participant_id": "own",
         "maturities": {c: LEVELS[grid[7][i]] for i, c in enumerate(CONTROLS)}},
        indent=2) + "\n")


if __name__ == "__main__":
    main()
