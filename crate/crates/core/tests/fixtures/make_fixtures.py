"""Regenerate the evaluator fixtures and their golden metrics.

Requires pycocotools. Run from this directory:

    python3 make_fixtures.py

Writes <name>_annotations.json, <name>_detections.json for each fixture and
goldens.json with the twelve reference stats for (a) the detections file and
(b) the ground truth submitted as score-1 detections in annotation-id order.
"""

import contextlib
import io
import json
import random

from pycocotools.coco import COCO
from pycocotools.cocoeval import COCOeval

CATEGORIES = [
    {"id": 1, "name": "person"},
    {"id": 2, "name": "car"},
    {"id": 3, "name": "dog"},
    {"id": 7, "name": "kite"},
    {"id": 9, "name": "unused"},  # never annotated
]

SIDES = [6, 14, 25, 31, 40, 60, 90, 120, 200]


def rand_box(rng, img_w, img_h, side=None):
    s = side if side is not None else rng.choice(SIDES)
    w = round(s * rng.uniform(0.6, 1.4), 2)
    h = round(s * rng.uniform(0.6, 1.4), 2)
    x = round(rng.uniform(0, max(1.0, img_w - w)), 2)
    y = round(rng.uniform(0, max(1.0, img_h - h)), 2)
    return [x, y, w, h]


def jitter(rng, bb, amount):
    x, y, w, h = bb
    return [
        round(x + rng.uniform(-amount, amount) * w, 2),
        round(y + rng.uniform(-amount, amount) * h, 2),
        round(max(0.5, w * rng.uniform(1 - amount, 1 + amount)), 2),
        round(max(0.5, h * rng.uniform(1 - amount, 1 + amount)), 2),
    ]


def make_images(n, first_id=3, stride=2):
    return [
        {"id": first_id + stride * i, "width": 640, "height": 480, "file_name": f"img{i}.jpg"}
        for i in range(n)
    ]


def build_mixed(seed):
    """Crowds, score ties, an unused category, detections on empty images."""
    rng = random.Random(seed)
    images = make_images(10)
    anns = []
    next_id = 100
    for img in images[:-1]:  # last image has no annotations at all
        for _ in range(rng.randint(2, 7)):
            cat = rng.choice([1, 2, 3, 7])
            bb = rand_box(rng, img["width"], img["height"])
            crowd = 1 if rng.random() < 0.12 else 0
            area = round(bb[2] * bb[3] * rng.uniform(0.55, 0.95), 3)
            anns.append({"id": next_id, "image_id": img["id"], "category_id": cat,
                         "bbox": bb, "area": area, "iscrowd": crowd})
            next_id += rng.randint(1, 5)
    rng.shuffle(anns)

    dets = []
    for a in anns:
        if rng.random() < 0.15:
            continue
        for _ in range(rng.randint(1, 3)):
            dets.append({"image_id": a["image_id"], "category_id": a["category_id"],
                         "bbox": jitter(rng, a["bbox"], 0.12),
                         "score": round(rng.choice([0.3, 0.5, 0.5, 0.7, 0.9, rng.random()]), 2)})
    for img in images:
        for _ in range(rng.randint(0, 3)):
            dets.append({"image_id": img["id"], "category_id": rng.choice([1, 2, 3, 7, 9]),
                         "bbox": rand_box(rng, img["width"], img["height"]),
                         "score": round(rng.random(), 2)})
    rng.shuffle(dets)
    return images, anns, dets


def build_ties(seed):
    """Ground truth resubmitted with score 1 and shifted by whole pixels."""
    rng = random.Random(seed)
    images = make_images(10, first_id=1, stride=1)
    anns = []
    next_id = 1
    for img in images:
        for _ in range(rng.randint(3, 8)):
            cat = rng.choice([1, 2, 3, 7])
            side = rng.choice([8, 12, 20, 28, 45, 70, 110, 150])
            bb = rand_box(rng, img["width"], img["height"], side)
            bb = [float(round(v)) for v in bb]
            bb[2] = max(bb[2], 2.0)
            bb[3] = max(bb[3], 2.0)
            crowd = 1 if rng.random() < 0.08 else 0
            area = round(bb[2] * bb[3] * rng.uniform(0.6, 0.95), 2)
            anns.append({"id": next_id, "image_id": img["id"], "category_id": cat,
                         "bbox": bb, "area": area, "iscrowd": crowd})
            next_id += 1
        # overlapping duplicate-size objects so tie order matters
        if rng.random() < 0.6 and anns:
            src = anns[-1]
            bb = list(src["bbox"])
            bb[0] += 1.0
            anns.append({"id": next_id, "image_id": img["id"], "category_id": src["category_id"],
                         "bbox": bb, "area": src["area"], "iscrowd": 0})
            next_id += 1
    dirs = [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, -1), (-1, 1), (1, 1)]
    dets = []
    for a in sorted(anns, key=lambda a: a["id"]):
        dx, dy = rng.choice(dirs)
        k = rng.choice([0, 1, 1, 2])
        x, y, w, h = a["bbox"]
        dets.append({"image_id": a["image_id"], "category_id": a["category_id"],
                     "bbox": [x + dx * k, y + dy * k, w, h], "score": 1.0})
    return images, anns, dets


def build_dense(seed):
    """Max-detection truncation, exact-threshold IOUs and bucket boundaries."""
    rng = random.Random(seed)
    images = make_images(8, first_id=10, stride=5)
    anns = []
    next_id = 1
    dets = []

    def add_gt(img_id, cat, bb, area, crowd=0):
        nonlocal next_id
        anns.append({"id": next_id, "image_id": img_id, "category_id": cat,
                     "bbox": bb, "area": area, "iscrowd": crowd})
        next_id += 1

    # image 0: 120 small objects of one category, 150 detections
    img = images[0]["id"]
    for i in range(120):
        bb = [float(10 + (i % 12) * 40), float(10 + (i // 12) * 40), 20.0, 20.0]
        add_gt(img, 1, bb, 380.0)
    for i in range(150):
        gi = rng.randrange(120)
        bb = anns[gi]["bbox"]
        dets.append({"image_id": img, "category_id": 1,
                     "bbox": jitter(rng, bb, 0.08), "score": round(rng.random(), 3)})

    # image 1: IOUs landing exactly on thresholds
    img = images[1]["id"]
    add_gt(img, 2, [0.0, 0.0, 100.0, 100.0], 10000.0)
    add_gt(img, 2, [200.0, 0.0, 100.0, 100.0], 10000.0)
    add_gt(img, 2, [400.0, 0.0, 100.0, 100.0], 10000.0)
    dets.append({"image_id": img, "category_id": 2, "bbox": [0.0, 0.0, 100.0, 50.0], "score": 0.9})
    dets.append({"image_id": img, "category_id": 2, "bbox": [200.0, 0.0, 100.0, 75.0], "score": 0.8})
    dets.append({"image_id": img, "category_id": 2, "bbox": [400.0, 0.0, 100.0, 60.0], "score": 0.7})

    # image 2: area exactly on the small/medium and medium/large boundaries
    img = images[2]["id"]
    add_gt(img, 3, [10.0, 10.0, 32.0, 32.0], 1024.0)
    add_gt(img, 3, [100.0, 10.0, 96.0, 96.0], 9216.0)
    add_gt(img, 3, [300.0, 10.0, 50.0, 50.0], 1024.0)
    dets.append({"image_id": img, "category_id": 3, "bbox": [10.0, 10.0, 32.0, 32.0], "score": 0.6})
    dets.append({"image_id": img, "category_id": 3, "bbox": [101.0, 11.0, 96.0, 96.0], "score": 0.6})
    dets.append({"image_id": img, "category_id": 3, "bbox": [302.0, 12.0, 50.0, 50.0], "score": 0.6})
    dets.append({"image_id": img, "category_id": 3, "bbox": [500.0, 300.0, 32.0, 32.0], "score": 0.6})

    # image 3: crowd region swallowing several detections, plus one GT inside it
    img = images[3]["id"]
    add_gt(img, 1, [0.0, 0.0, 300.0, 300.0], 60000.0, crowd=1)
    add_gt(img, 1, [20.0, 20.0, 40.0, 40.0], 1500.0)
    for i in range(6):
        dets.append({"image_id": img, "category_id": 1,
                     "bbox": [float(10 + 30 * i), 30.0, 40.0, 40.0], "score": 0.5})
    dets.append({"image_id": img, "category_id": 1, "bbox": [21.0, 21.0, 40.0, 40.0], "score": 0.4})

    # remaining images: random mix with fractional coordinates
    for im in images[4:]:
        for _ in range(rng.randint(1, 6)):
            cat = rng.choice([1, 2, 3, 7])
            bb = rand_box(rng, 640, 480)
            add_gt(im["id"], cat, bb, round(bb[2] * bb[3] * 0.8, 4), crowd=int(rng.random() < 0.1))
            for _ in range(rng.randint(0, 2)):
                dets.append({"image_id": im["id"], "category_id": cat,
                             "bbox": jitter(rng, bb, 0.1), "score": round(rng.random(), 1)})
    return images, anns, dets


def evaluate(ann_path, dets):
    with contextlib.redirect_stdout(io.StringIO()):
        gt = COCO(ann_path)
        dt = gt.loadRes(dets)
        ev = COCOeval(gt, dt, "bbox")
        ev.evaluate()
        ev.accumulate()
        ev.summarize()
    return [float(v) for v in ev.stats]


def main():
    goldens = {}
    for name, builder, seed in [("mixed", build_mixed, 11), ("ties", build_ties, 22), ("dense", build_dense, 33)]:
        images, anns, dets = builder(seed)
        doc = {"info": {"description": f"{name} fixture"}, "images": images,
               "annotations": anns, "categories": CATEGORIES}
        ann_path = f"{name}_annotations.json"
        with open(ann_path, "w") as f:
            json.dump(doc, f, indent=1)
        with open(f"{name}_detections.json", "w") as f:
            json.dump(dets, f, indent=1)
        gt_dets = [{"image_id": a["image_id"], "category_id": a["category_id"],
                    "bbox": a["bbox"], "score": 1.0} for a in sorted(anns, key=lambda a: a["id"])]
        goldens[name] = {
            "detections": evaluate(ann_path, dets),
            "gt_as_detections": evaluate(ann_path, gt_dets),
        }
    with open("goldens.json", "w") as f:
        json.dump(goldens, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
