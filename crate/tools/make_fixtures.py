"""Generate the evaluation fixture frames and their ground truth.

Face crops come from two public-domain photos bundled with scikit-image
(astronaut) and matplotlib (Grace Hopper). Each positive frame pastes one
rescaled, feathered face crop onto a synthetic background; negatives are
backgrounds alone. Output is deterministic for a given seed.

    python3 tools/make_fixtures.py fixtures/eval
"""

import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image, ImageFilter
from skimage import data

W, H = 640, 480
SEED = 20240611
N_POS = 20
N_NEG = 20

# Face boxes marked on the source photos, (x, y, w, h).
SOURCES = {
    "astronaut": (176, 67, 96, 96),
    "hopper": (152, 103, 228, 228),
}


def luma(rgb):
    rgb = rgb.astype(np.int64)
    return ((299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000).astype(np.uint8)


def load_sources():
    import matplotlib.cbook as cbook

    with cbook.get_sample_data("grace_hopper.jpg") as f:
        hopper = np.asarray(Image.open(f).convert("RGB"))
    return {"astronaut": luma(data.astronaut()), "hopper": luma(hopper)}


def background(rng):
    kind = rng.integers(4)
    yy, xx = np.mgrid[0:H, 0:W].astype(np.float64)
    if kind == 0:
        a, b = rng.uniform(-0.15, 0.15, size=2)
        img = rng.uniform(60, 190) + a * xx + b * yy
    elif kind == 1:
        noise = rng.normal(0, 1, size=(H // 16 + 1, W // 16 + 1))
        up = Image.fromarray(((noise - noise.min()) / np.ptp(noise) * 255).astype(np.uint8)).resize((W, H), Image.BICUBIC)
        img = rng.uniform(70, 150) + (np.asarray(up, dtype=np.float64) - 128) * rng.uniform(0.2, 0.5)
    elif kind == 2:
        period = rng.uniform(40, 120)
        angle = rng.uniform(0, np.pi)
        phase = (xx * np.cos(angle) + yy * np.sin(angle)) / period * 2 * np.pi
        img = rng.uniform(90, 160) + rng.uniform(10, 30) * np.sin(phase)
    else:
        img = np.full((H, W), rng.uniform(80, 170))
        for _ in range(rng.integers(3, 8)):
            x0, y0 = rng.integers(0, W - 60), rng.integers(0, H - 60)
            w, h = rng.integers(40, 220), rng.integers(40, 200)
            img[y0:y0 + h, x0:x0 + w] += rng.uniform(-40, 40)
        img = np.asarray(Image.fromarray(np.clip(img, 0, 255).astype(np.uint8)).filter(ImageFilter.GaussianBlur(6)), dtype=np.float64)
    img = img + rng.normal(0, 1.0, size=img.shape)
    return img


def paste_face(rng, canvas, sources):
    name = ["astronaut", "hopper"][rng.integers(2)]
    src = sources[name]
    fx, fy, fw, fh = SOURCES[name]
    margin = 0.45
    x0, y0 = max(0, int(fx - margin * fw)), max(0, int(fy - margin * fh))
    x1, y1 = min(src.shape[1], int(fx + fw * (1 + margin))), min(src.shape[0], int(fy + fh * (1 + margin)))
    crop = src[y0:y1, x0:x1]
    if rng.random() < 0.5:
        crop = crop[:, ::-1]
        fx = x0 + (x1 - (fx + fw))
    else:
        fx = fx
    target = rng.uniform(150, 230)
    s = target / fw
    cw, ch = int(round(crop.shape[1] * s)), int(round(crop.shape[0] * s))
    crop = np.asarray(Image.fromarray(crop).resize((cw, ch), Image.BILINEAR), dtype=np.float64)
    gain, offset = rng.uniform(0.8, 1.15), rng.uniform(-20, 20)
    crop = np.clip((crop - 128) * gain + 128 + offset, 0, 255)

    face = (int(round((fx - x0) * s)), int(round((fy - y0) * s)), int(round(fw * s)), int(round(fh * s)))
    px = int(rng.integers(max(-face[0], 0) - min(face[0], 0), W - cw + 1)) if cw < W else 0
    py = int(rng.integers(0, max(1, H - ch + 1)))
    # keep the whole face box inside the frame
    px = int(np.clip(px, -face[0], W - face[0] - face[2]))
    py = int(np.clip(py, -face[1], H - face[1] - face[3]))

    yy, xx = np.mgrid[0:ch, 0:cw].astype(np.float64)
    r = np.hypot((xx - cw / 2) / (cw / 2), (yy - ch / 2) / (ch / 2))
    alpha = np.clip((1.0 - r) / 0.25, 0, 1)

    cx0, cy0 = max(px, 0), max(py, 0)
    cx1, cy1 = min(px + cw, W), min(py + ch, H)
    sub = (slice(cy0 - py, cy1 - py), slice(cx0 - px, cx1 - px))
    region = canvas[cy0:cy1, cx0:cx1]
    canvas[cy0:cy1, cx0:cx1] = region * (1 - alpha[sub]) + crop[sub] * alpha[sub]
    return name, [face[0] + px, face[1] + py, face[2], face[3]]


def main(out):
    out = Path(out)
    frames = out / "frames"
    frames.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    sources = load_sources()
    labels = [True] * N_POS + [False] * N_NEG
    rng.shuffle(labels)
    records = []
    for i, present in enumerate(labels):
        frame_id = f"f{i:03d}"
        canvas = background(rng)
        rec = {"frame_id": frame_id, "face_present": bool(present), "eyes_present": bool(present)}
        if present:
            _, box = paste_face(rng, canvas, sources)
            rec["face_box"] = box
        Image.fromarray(np.clip(np.rint(canvas), 0, 255).astype(np.uint8)).save(frames / f"{frame_id}.png", optimize=True)
        records.append(rec)
    with open(out / "gt.jsonl", "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/eval")
