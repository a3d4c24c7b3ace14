#!/usr/bin/env python3
"""Regenerates the bundled scenario files in scenarios/.

    python3 tools/make_scenarios.py [output_dir]
"""
import json
import pathlib
import sys

DYNAMICS = {
    "youngs_modulus": 1e9,
    "poisson": 0.4,
    "block_weight": -900.0,
    "eta": 1e6,
    "dt": 1e-5,
    "num_steps": 60000,
    "record_every": 100,
}


def block(x, y, z, kind="structural"):
    return {"x": x, "y": y, "z": z, "kind": kind}


def desert_bridge(center_support):
    # 20 m gap between x = 0 and x = 19, 3 m wide deck two blocks deep,
    # resting on two-block abutments at each end of the road.
    blocks = []
    for x in range(-2, 22):
        for y in (1, 2):
            for z in range(3):
                blocks.append(block(x, y, z))
    piers = [-2, -1, 20, 21] + ([9, 10] if center_support else [])
    for x in piers:
        for z in range(3):
            blocks.append(block(x, 0, z))
    name = "desert_bridge_supported" if center_support else "desert_bridge"
    desc = ("Desert bridge with a centre pier" if center_support else
            "Desert bridge: straight deck over a 20 m gap, 3 m wide")
    return {
        "name": name,
        "description": desc,
        "ground_level": 0,
        "properties": dict(DYNAMICS, ult_stress=15000.0),
        "runs": [{"name": "bridge", "mode": "stress", "seed": [0, 2, 1], "radius": 30}],
        "blocks": blocks,
    }


SECTIONS = {
    # (x, y) cells of each 3 x 3 bounding box, y = 2..4
    "I": [(-1, 4), (0, 4), (1, 4), (0, 3), (-1, 2), (0, 2), (1, 2)],
    "H": [(-1, 2), (-1, 3), (-1, 4), (0, 3), (1, 2), (1, 3), (1, 4)],
    "square": [(x, y) for x in (-1, 0, 1) for y in (2, 3, 4)],
    "box": [(x, y) for x in (-1, 0, 1) for y in (2, 3, 4) if (x, y) != (0, 3)],
}
TRACKED = {"I": (0, 3), "H": (0, 3), "square": (0, 3), "box": (0, 4)}
SPAN = 10


def cross_sections():
    blocks, runs = [], []
    for k, (name, cells) in enumerate(SECTIONS.items()):
        cx = 8 * k
        for x, y in cells:
            blocks.append(block(cx + x, y, 0, "fixed"))
            for z in range(1, SPAN + 1):
                blocks.append(block(cx + x, y, z))
        tx, ty = TRACKED[name]
        runs.append({
            "name": name,
            "mode": "position",
            "seed": [cx, 3, SPAN // 2],
            "radius": 6,
            "special_block": [cx + tx, ty, SPAN],
        })
    return {
        "name": "cross_sections",
        "description": "Four 10 m cantilevers built out from a fixed wall",
        "ground_level": 0,
        "properties": dict(DYNAMICS, ult_stress=65000.0),
        "runs": runs,
        "blocks": blocks,
    }


def write(doc, out):
    # one block per line keeps the files diffable
    head = {k: v for k, v in doc.items() if k != "blocks"}
    text = json.dumps(head, indent=2)[:-2]
    lines = ",\n".join("    " + json.dumps(b) for b in doc["blocks"])
    text += ',\n  "blocks": [\n' + lines + "\n  ]\n}\n"
    (out / (doc["name"] + ".json")).write_text(text)


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent.parent / "scenarios")
    out.mkdir(parents=True, exist_ok=True)
    for doc in (desert_bridge(False), desert_bridge(True), cross_sections()):
        write(doc, out)


if __name__ == "__main__":
    main()
