"""Feature extractor: the convolutional trunk of a pretrained 16-layer net.

Images are resized to 224x224 and normalized with the network's training
statistics; the forward pass stops at the final max-pooling layer, whose
7x7x512 activation grid is flattened channel-last to 25088 values.
"""

from __future__ import annotations

import numpy as np
import torch
from torchvision import models, transforms

__all__ = ["EMBEDDING_DIM", "build_extractor", "preprocess", "embed_batch"]

EMBEDDING_DIM = 25088  # 7 * 7 * 512 after five 2x poolings of a 224 input

_NORMALIZE = transforms.Normalize(mean=[0.485, 0.456, 0.406], std=[0.229, 0.224, 0.225])


def build_extractor(weights: str = "pretrained", seed: int = 0) -> torch.nn.Module:
    """Convolutional trunk ending at the last max-pool, in eval mode.

    `weights="pretrained"` downloads the published checkpoint (raises a
    clear error when that is impossible); `weights="random"` initializes
    deterministically from `seed` for offline contract testing - the
    output layout is identical, only the values are untrained.
    """
    if weights == "pretrained":
        try:
            net = models.vgg16(weights=models.VGG16_Weights.IMAGENET1K_V1)
        except Exception as exc:  # download or cache failure
            raise RuntimeError(
                "could not obtain pretrained weights; pass --weights random for "
                f"an untrained (testing-only) extractor ({exc})"
            ) from exc
    elif weights == "random":
        torch.manual_seed(seed)
        net = models.vgg16(weights=None)
    else:
        raise ValueError(f"unknown weights option {weights!r}; use 'pretrained' or 'random'")
    trunk = net.features
    trunk.eval()
    for param in trunk.parameters():
        param.requires_grad_(False)
    return trunk


def preprocess(image_rgb: np.ndarray) -> torch.Tensor:
    """(h, w, 3) uint8 -> normalized (3, 224, 224) float tensor."""
    tensor = torch.from_numpy(image_rgb.copy()).permute(2, 0, 1).float() / 255.0
    tensor = torch.nn.functional.interpolate(
        tensor.unsqueeze(0), size=(224, 224), mode="bilinear", align_corners=False
    ).squeeze(0)
    return _NORMALIZE(tensor)


def embed_batch(trunk: torch.nn.Module, batch: torch.Tensor) -> np.ndarray:
    """Forward a (b, 3, 224, 224) batch; rows are channel-last flattened."""
    with torch.no_grad():
        activations = trunk(batch)  # (b, 512, 7, 7)
    flat = activations.permute(0, 2, 3, 1).reshape(activations.shape[0], -1)
    out = flat.numpy().astype(np.float64)
    if out.shape[1] != EMBEDDING_DIM:
        raise RuntimeError(f"unexpected embedding width {out.shape[1]}")
    return out
