#!/usr/bin/env python3
"""Generates the synthetic handwritten-code dataset under data/synthetic.

Every program is laid out the way a student might write it: each line's
left edge sits at margin + level * indent_step plus a little jitter and a
slow rightward drift, and a fraction of lines carry OCR-style misreadings.
Because the generator knows the true text, levels and corruptions, it can
state the expected OCR Error of several pipeline configurations without
running the C++ code. Those expectations are written to expected_scores.json
using the independent edit-distance routine below.

Usage: python3 tools/make_synthetic_fixtures.py [--out data/synthetic]
"""

import argparse
import json
import math
import random
import statistics
from pathlib import Path

SEED = 20240215
N_CORRECT = 44
N_LOGICAL = 11
N_TRAINING = 16

# Misreadings the "language model" mock repairs, and ones it leaves alone.
FIXABLE = [("print", "pnint"), ("return", "retunn"), ("while", "whlle"), ("range", "nange"),
           ("input", "inpvt")]
UNFIXABLE = [("=", "-"), (":", ";"), ("(", "C"), ("o", "0"), ("l", "1"), ("e", "c")]


# ---------------------------------------------------------------------------
# Oracle: canonicalization and edit distance, written independently of the
# C++ implementation.

def canonicalize(text):
    text = text.replace("\r\n", "\n").replace("\r", "\n").replace("\t", "    ")
    lines = [line.rstrip(" \f\v") for line in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines)


def edit_distance(a, b):
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def l_norm(gold, predicted):
    gold, predicted = canonicalize(gold), canonicalize(predicted)
    return edit_distance(gold, predicted) / len(gold) * 100.0


# ---------------------------------------------------------------------------
# Program corpus

def correct_programs(rng):
    names = ["total", "count", "value", "result", "score", "amount", "item", "number"]
    words = ["apple", "robot", "karel", "beeper", "planet", "river", "garden", "rocket"]
    templates = []

    def t_sum(k):
        n = rng.randint(3, 12)
        v = rng.choice(names)
        return [(0, f"def add_up_{k}(limit):"),
                (1, f"{v} = 0"),
                (1, "for i in range(limit):"),
                (2, f"{v} = {v} + i"),
                (1, f"return {v}"),
                (0, ""),
                (0, f"print(add_up_{k}({n}))")]

    def t_while(k):
        n = rng.randint(2, 9)
        return [(0, "def main():"),
                (1, f"x = {n}"),
                (1, "while x > 0:"),
                (2, "if x % 2 == 0:"),
                (3, "print(\"even\", x)"),
                (2, "else:"),
                (3, "print(\"odd\", x)"),
                (2, "x = x - 1"),
                (1, "print(\"done\")"),
                (0, ""),
                (0, "main()")]

    def t_karel(k):
        steps = rng.randint(2, 6)
        return [(0, "from karel.stanfordkarel import *"),
                (0, ""),
                (0, "def main():"),
                (1, f"for i in range({steps}):"),
                (2, "if beepers_present():"),
                (3, "pick_beeper()"),
                (2, "move()"),
                (1, "turn_left()"),
                (0, ""),
                (0, "def turn_right():"),
                (1, "for i in range(3):"),
                (2, "turn_left()")]

    def t_list(k):
        w = rng.sample(words, 3)
        return [(0, "def main():"),
                (1, f"things = [\"{w[0]}\", \"{w[1]}\", \"{w[2]}\"]"),
                (1, "for thing in things:"),
                (2, "if len(thing) > 5:"),
                (3, "print(thing.upper())"),
                (1, "print(len(things))"),
                (0, ""),
                (0, "if __name__ == \"__main__\":"),
                (1, "main()")]

    def t_input(k):
        v = rng.choice(names)
        return [(0, "def main():"),
                (1, f"{v} = int(input(\"Enter a number: \"))"),
                (1, f"if {v} > 10:"),
                (2, "print(\"big\")"),
                (1, f"elif {v} > 5:"),
                (2, "print(\"medium\")"),
                (1, "else:"),
                (2, "print(\"small\")"),
                (0, ""),
                (0, "main()")]

    def t_nested(k):
        n = rng.randint(2, 5)
        return [(0, "def grid(size):"),
                (1, "for row in range(size):"),
                (2, "line = \"\""),
                (2, "for col in range(size):"),
                (3, "if row == col:"),
                (4, "line = line + \"x\""),
                (3, "else:"),
                (4, "line = line + \".\""),
                (2, "print(line)"),
                (0, ""),
                (0, f"grid({n})")]

    def t_fib(k):
        n = rng.randint(5, 15)
        return [(0, "def fibonacci(n):"),
                (1, "a = 0"),
                (1, "b = 1"),
                (1, "while a < n:"),
                (2, "print(a)"),
                (2, "a, b = b, a + b"),
                (0, ""),
                (0, f"fibonacci({n})")]

    def t_dict(k):
        w = rng.sample(words, 2)
        return [(0, "def count_letters(word):"),
                (1, "counts = {}"),
                (1, "for letter in word:"),
                (2, "if letter in counts:"),
                (3, "counts[letter] += 1"),
                (2, "else:"),
                (3, "counts[letter] = 1"),
                (1, "return counts"),
                (0, ""),
                (0, f"print(count_letters(\"{w[0]}\"))"),
                (0, f"print(count_letters(\"{w[1]}\"))")]

    makers = [t_sum, t_while, t_karel, t_list, t_input, t_nested, t_fib, t_dict]
    for k in range(N_CORRECT):
        templates.append(makers[k % len(makers)](k))
    return templates


def logical_programs():
    """(lines, annotation) pairs; each program carries one deliberate bug."""
    return [
        ([(0, "def is_odd(number):"),
          (1, "if number / 2 != 0:"),
          (2, "return True"),
          (1, "return False"),
          (0, ""),
          (0, "print(is_odd(7))")],
         {"description": "used division instead of modulo", "buggy_snippet": "number / 2",
          "fixed_snippet": "number % 2", "category": "Arithmetic"}),
        ([(0, "def sum_to(n):"),
          (1, "total = 0"),
          (1, "for i in range(1, n):"),
          (2, "total += i"),
          (1, "return total"),
          (0, ""),
          (0, "print(sum_to(10))")],
         {"description": "loop stops one short of n", "buggy_snippet": "range(1, n)",
          "fixed_snippet": "range(1, n + 1)", "category": "FencePost"}),
        ([(0, "def average(values):"),
          (1, "total = 0"),
          (1, "for v in values:"),
          (2, "total += v"),
          (1, "return total / len(values) + 1"),
          (0, ""),
          (0, "print(average([2, 4, 6]))")],
         {"description": "adds one to the average", "buggy_snippet": "total / len(values) + 1",
          "fixed_snippet": "total / len(values)", "category": "Arithmetic"}),
        ([(0, "def is_leap(year):"),
          (1, "if (year % 4 == 0) or (year % 100 == 0) or (year % 400 == 0):"),
          (2, "return True"),
          (1, "return False"),
          (0, ""),
          (0, "print(is_leap(1900))")],
         {"description": "wrong leap year logic",
          "buggy_snippet": "(year % 4 == 0) or (year % 100 == 0) or (year % 400 == 0)",
          "fixed_snippet": "(year % 4 == 0) and (year % 100 != 0) or (year % 400 == 0)",
          "category": "ControlFlow"}),
        ([(0, "def countdown(n):"),
          (1, "while n > 0:"),
          (2, "print(n)"),
          (1, "n = n - 1"),
          (0, ""),
          (0, "countdown(3)")],
         {"description": "decrement outside the loop body", "buggy_snippet": "print(n)\n    n = n - 1",
          "fixed_snippet": "print(n)\n        n = n - 1", "category": "Scope"}),
        ([(0, "def find_max(values):"),
          (1, "best = 0"),
          (1, "for v in values:"),
          (2, "if v < best:"),
          (3, "best = v"),
          (1, "return best"),
          (0, ""),
          (0, "print(find_max([3, 9, 4]))")],
         {"description": "comparison reversed", "buggy_snippet": "v < best",
          "fixed_snippet": "v > best", "category": "ControlFlow"}),
        ([(0, "def last_item(items):"),
          (1, "return items[len(items)]"),
          (0, ""),
          (0, "print(last_item([1, 2, 3]))")],
         {"description": "index one past the end", "buggy_snippet": "items[len(items)]",
          "fixed_snippet": "items[len(items) - 1]", "category": "FencePost"}),
        ([(0, "def celsius_to_fahrenheit(c):"),
          (1, "return c * 9 / 5 - 32"),
          (0, ""),
          (0, "print(celsius_to_fahrenheit(100))")],
         {"description": "subtracts instead of adds", "buggy_snippet": "c * 9 / 5 - 32",
          "fixed_snippet": "c * 9 / 5 + 32", "category": "Arithmetic"}),
        ([(0, "def factorial(n):"),
          (1, "result = 0"),
          (1, "for i in range(1, n + 1):"),
          (2, "result = result * i"),
          (1, "return result"),
          (0, ""),
          (0, "print(factorial(5))")],
         {"description": "product starts at zero", "buggy_snippet": "result = 0",
          "fixed_snippet": "result = 1", "category": "Arithmetic"}),
        ([(0, "def print_grid(size):"),
          (1, "for row in range(size):"),
          (2, "line = \"\""),
          (2, "for col in range(size):"),
          (3, "line = line + \"#\""),
          (3, "print(line)"),
          (0, ""),
          (0, "print_grid(3)")],
         {"description": "print inside the inner loop",
          "buggy_snippet": "line = line + \"#\"\n            print(line)",
          "fixed_snippet": "line = line + \"#\"\n        print(line)", "category": "Scope"}),
        ([(0, "def count_vowels(word):"),
          (1, "count = 0"),
          (1, "for letter in word:"),
          (2, "if letter in \"aeiou\":"),
          (3, "count = 1"),
          (1, "return count"),
          (0, ""),
          (0, "print(count_vowels(\"banana\"))")],
         {"description": "assigns instead of increments", "buggy_snippet": "count = 1",
          "fixed_snippet": "count += 1", "category": "Arithmetic"}),
    ]


# ---------------------------------------------------------------------------
# Layout and corruption

def render(lines):
    return "\n".join(("    " * level + text) if text else "" for level, text in lines)


def corrupt(text, rng, protected):
    """Returns (ocr_text, fixable_applied). Protected substrings are left alone."""
    if not text or any(p and p in text for p in protected):
        return text, []
    fixable = []
    for right, wrong in FIXABLE:
        if right in text and rng.random() < 0.5:
            text = text.replace(right, wrong, 1)
            fixable.append((wrong, right))
    if rng.random() < 0.3:
        right, wrong = rng.choice(UNFIXABLE)
        positions = [i for i in range(len(text)) if text.startswith(right, i)]
        if positions:
            i = rng.choice(positions)
            text = text[:i] + wrong + text[i + len(right):]
    return text, fixable


def layout(lines, rng, drift_px):
    width = rng.randint(1000, 1200)
    line_height = rng.randint(30, 40)
    step = rng.randint(80, 92)
    margin = rng.randint(40, 70)
    y = rng.randint(30, 60)
    boxes = []
    for index, (level, text) in enumerate(lines):
        x = margin + level * step + rng.randint(-3, 3) + int(index * drift_px)
        glyph = 14
        boxes.append({"x_min": x, "y_min": y, "x_max": x + max(len(text), 1) * glyph,
                      "y_max": y + line_height})
        y += line_height + rng.randint(8, 16)
    return width, y + 40, boxes


def draw_png(path, width, height, texts, boxes):
    try:
        from PIL import Image, ImageDraw
    except ImportError:
        path.write_bytes(b"\x89PNG\r\n\x1a\n")
        return
    image = Image.new("L", (width, height), 255)
    draw = ImageDraw.Draw(image)
    for text, box in zip(texts, boxes):
        draw.text((box["x_min"], box["y_min"] + 6), text, fill=0)
    image.save(path, optimize=True)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "synthetic"))
    args = parser.parse_args()
    out = Path(args.out)
    for sub in ("gold", "images", "fixtures/replay", "mocks"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    rng = random.Random(SEED)
    programs = [(lines, None) for lines in correct_programs(rng)] + logical_programs()
    training = set(rng.sample(range(len(programs)), N_TRAINING))

    entries = []
    sidecar = {"configs": {}}
    per_config = {name: {} for name in ("ocr_raw", "relative", "relative_cot_mock", "relative_simple_mock")}
    logical_fixed = []
    training_deltas = []
    substitutions = [{"from": wrong, "to": right} for right, wrong in FIXABLE]
    hallucination = {"from": "number / 2", "to": "number % 2"}

    for index, (lines, annotation) in enumerate(programs):
        pid = f"p{index + 1:02d}"
        split = "logical_error" if annotation else "correct"
        gold = render(lines)
        (out / "gold" / f"{pid}.py").write_text(gold + "\n")

        protected = []
        if annotation:
            protected = [part.strip() for part in annotation["buggy_snippet"].split("\n")]
        drift = rng.choice([0.0, 0.0, 1.5, 3.5])
        width, height, boxes = layout(lines, rng, drift)
        # Blank lines leave a gap on the page but produce no recognized line.
        written = [(level, box) for (level, text), box in zip(lines, boxes) if text]
        ocr_lines = []
        for (level, text), box in zip(lines, boxes):
            if not text:
                continue
            ocr_text, _ = corrupt(text, rng, protected)
            ocr_lines.append({"text": ocr_text, "box": box})
        doc = {"image_width": width, "image_height": height, "provider_id": "synthetic", "lines": ocr_lines}
        (out / "fixtures" / "replay" / f"{pid}.json").write_text(json.dumps(doc, indent=2) + "\n")
        draw_png(out / "images" / f"{pid}.png", width, height, [t for _, t in lines], boxes)

        levels = [level for level, _ in written]
        boxes = [box for _, box in written]
        texts = [line["text"] for line in ocr_lines]
        raw = "\n".join(texts)
        relative = render(list(zip(levels, texts)))

        def fix(code, rules):
            for rule in rules:
                code = code.replace(rule["from"], rule["to"])
            return code

        cot = fix(relative, substitutions)
        simple = fix(relative, substitutions + [hallucination])
        per_config["ocr_raw"][pid] = l_norm(gold, raw)
        per_config["relative"][pid] = l_norm(gold, relative)
        per_config["relative_cot_mock"][pid] = l_norm(gold, cot)
        per_config["relative_simple_mock"][pid] = l_norm(gold, simple)
        if annotation and hallucination["from"] in annotation["buggy_snippet"]:
            logical_fixed.append(pid)

        if index in training:
            for i in range(1, len(boxes)):
                delta = (boxes[i]["x_min"] - boxes[i - 1]["x_min"]) / width
                if delta > 0:
                    label = "indent" if levels[i] == levels[i - 1] + 1 else "no_indent"
                    training_deltas.append({"program_id": pid, "delta": delta, "label": label})

        entry = {"program_id": pid, "image": f"images/{pid}.png", "gold": f"gold/{pid}.py", "split": split,
                 "heldout": index not in training}
        if annotation:
            entry["annotation"] = annotation
        entries.append(entry)

    for name, scores in per_config.items():
        values = [scores[pid] for pid in sorted(scores)]
        mean = sum(values) / len(values)
        sidecar["configs"][name] = {
            "n": len(values),
            "mean": mean,
            "std_error": statistics.stdev(values) / math.sqrt(len(values)),
            "per_program": {pid: scores[pid] for pid in sorted(scores)},
        }
    sidecar["configs"]["relative_simple_mock"]["logical_fix_programs"] = sorted(logical_fixed)
    sidecar["configs"]["relative_cot_mock"]["logical_fix_programs"] = []

    def fit(label):
        values = [d["delta"] for d in training_deltas if d["label"] == label]
        return statistics.fmean(values), max(statistics.pstdev(values), 1e-6)

    mu1, s1 = fit("no_indent")
    mu2, s2 = fit("indent")
    sidecar["gmm_fit"] = {"mu_no_indent": mu1, "sigma_no_indent": s1, "mu_indent": mu2, "sigma_indent": s2,
                          "tau": 0.5}

    (out / "manifest.json").write_text(json.dumps({"entries": entries}, indent=2) + "\n")
    (out / "expected_scores.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    (out / "training_deltas.json").write_text(json.dumps({"samples": training_deltas}, indent=2) + "\n")
    (out / "mocks" / "echo.json").write_text(json.dumps({"mode": "echo"}, indent=2) + "\n")
    (out / "mocks" / "typo_fixer.json").write_text(
        json.dumps({"mode": "echo", "substitutions": substitutions}, indent=2) + "\n")
    (out / "mocks" / "overeager_fixer.json").write_text(
        json.dumps({"mode": "echo", "substitutions": substitutions + [hallucination]}, indent=2) + "\n")
    print(f"wrote {len(entries)} entries to {out}")


if __name__ == "__main__":
    main()
