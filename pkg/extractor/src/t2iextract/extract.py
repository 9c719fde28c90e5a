"""Bundle extraction with an off-the-shelf pretrained vision-language
encoder.

Images are paired with captions by sorted filename order against the line
order of the captions file. The encoder's projected image/text embeddings
become img/sent vectors; its patch-level vision states become region
features and its per-token text states (before pooling) become word
vectors. Model weights must already be available locally; nothing is
downloaded here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .formats import write_bundle

IMAGE_EXTENSIONS = {".jpg", ".jpeg", ".png", ".bmp", ".webp"}
DEFAULT_ENCODER = "openai/clip-vit-base-patch32"


class ExtractionError(Exception):
    pass


class EncoderUnavailable(ExtractionError):
    pass


class ImageDecodeFailure(ExtractionError):
    pass


class AlignmentError(ExtractionError):
    pass


@dataclass
class ExtractionConfig:
    image_dir: str
    captions_file: str
    out_dir: str
    encoder: str = DEFAULT_ENCODER
    batch_size: int = 16
    device: str = "cpu"
    skip_bad_images: bool = False

    @classmethod
    def from_json(cls, path) -> "ExtractionConfig":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))


def _load_encoder(name: str, device: str):
    try:
        import torch  # noqa: F401
        from transformers import CLIPModel, CLIPProcessor
    except ImportError as exc:
        raise EncoderUnavailable(f"torch/transformers not installed: {exc}")
    try:
        model = CLIPModel.from_pretrained(name, local_files_only=True)
        processor = CLIPProcessor.from_pretrained(name, local_files_only=True)
    except OSError as exc:
        raise EncoderUnavailable(
            f"encoder {name!r} is not available locally: {exc}"
        )
    model.eval()
    model.to(device)
    return model, processor


def extract(config: ExtractionConfig) -> Path:
    try:
        from PIL import Image
    except ImportError as exc:
        raise EncoderUnavailable(f"Pillow not installed: {exc}")
    import torch

    image_dir = Path(config.image_dir)
    image_paths = sorted(
        p for p in image_dir.iterdir()
        if p.suffix.lower() in IMAGE_EXTENSIONS
    )
    captions = [
        line for line in
        Path(config.captions_file).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if len(captions) != len(image_paths):
        raise AlignmentError(
            f"{len(image_paths)} images but {len(captions)} captions"
        )
    if not image_paths:
        raise AlignmentError("no images found")

    model, processor = _load_encoder(config.encoder, config.device)

    imgs, sents, regions, word_chunks = [], [], [], []
    kept_captions = []
    torch.manual_seed(0)
    with torch.no_grad():
        for start in range(0, len(image_paths), config.batch_size):
            batch_paths = image_paths[start:start + config.batch_size]
            batch_caps = captions[start:start + config.batch_size]
            images = []
            caps = []
            for path, cap in zip(batch_paths, batch_caps):
                try:
                    images.append(Image.open(path).convert("RGB"))
                except Exception as exc:
                    if config.skip_bad_images:
                        print(f"warning: skipping {path}: {exc}")
                        continue
                    raise ImageDecodeFailure(f"{path}: {exc}") from exc
                caps.append(cap)
            if not images:
                continue
            inputs = processor(
                text=caps, images=images, return_tensors="pt",
                padding=True, truncation=True,
            ).to(config.device)
            vision = model.vision_model(pixel_values=inputs.pixel_values)
            text = model.text_model(
                input_ids=inputs.input_ids,
                attention_mask=inputs.attention_mask,
            )
            imgs.append(
                model.visual_projection(vision.pooler_output).cpu().numpy()
            )
            sents.append(
                model.text_projection(text.pooler_output).cpu().numpy()
            )
            # patch states (minus the class token) projected to the shared space
            patches = model.visual_projection(
                vision.last_hidden_state[:, 1:, :]
            )
            regions.append(patches.cpu().numpy())
            tokens = model.text_projection(text.last_hidden_state)
            mask = inputs.attention_mask.cpu().numpy().astype(bool)
            for row, keep in zip(tokens.cpu().numpy(), mask):
                word_chunks.append(row[keep])
            kept_captions.extend(caps)

    img = np.concatenate(imgs)
    sent = np.concatenate(sents)
    region_arr = np.concatenate(regions)
    offsets = np.concatenate(
        [[0], np.cumsum([len(c) for c in word_chunks])]
    )
    words = np.concatenate(word_chunks)
    return write_bundle(
        config.out_dir, img, sent, region_arr, words, offsets,
        encoder=f"{config.encoder} (per-token text states as word vectors)",
    )
