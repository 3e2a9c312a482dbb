"""U-Net generator forward pass and its fixed architecture table.

The network is fully convolutional: 8 encoder stages (4x4 conv, stride 2,
LeakyReLU 0.2, instance norm on stages 2-7) and 8 decoder stages (4x4
transposed conv, stride 2, ReLU, instance norm except the last, skip
concatenation with the mirrored encoder stage, final tanh). Input dimensions
must be divisible by 256 (= 2^8, the downsampling depth); callers pad first.

Weight layouts: encoder (out, in, 4, 4); decoder (in, out, 4, 4); bias (out,).
Skip features are concatenated BEFORE the upsampled features on the channel
axis. Pixel mapping: v/127.5 - 1 on the way in, (v+1)*127.5 rounded half away
from zero and clamped on the way out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nnops
from .errors import ContractError
from .imagebuf import ImageBuffer
from .tiling import quantize_u8
from .weightfile import TensorKey, read_weight_file, write_weight_file

ALIGN = 256  # 2^8: one halving per encoder stage


@dataclass(frozen=True)
class StageSpec:
    name: str
    in_channels: int
    out_channels: int
    norm: bool


ENCODER: tuple[StageSpec, ...] = (
    StageSpec("enc1", 3, 64, norm=False),
    StageSpec("enc2", 64, 128, norm=True),
    StageSpec("enc3", 128, 256, norm=True),
    StageSpec("enc4", 256, 512, norm=True),
    StageSpec("enc5", 512, 512, norm=True),
    StageSpec("enc6", 512, 512, norm=True),
    StageSpec("enc7", 512, 512, norm=True),
    StageSpec("enc8", 512, 512, norm=False),
)

DECODER: tuple[StageSpec, ...] = (
    StageSpec("dec1", 512, 512, norm=True),
    StageSpec("dec2", 1024, 512, norm=True),
    StageSpec("dec3", 1024, 512, norm=True),
    StageSpec("dec4", 1024, 512, norm=True),
    StageSpec("dec5", 1024, 256, norm=True),
    StageSpec("dec6", 512, 128, norm=True),
    StageSpec("dec7", 256, 64, norm=True),
    StageSpec("dec8", 128, 3, norm=False),
)


def parameter_specs() -> list[tuple[str, str, tuple[int, ...]]]:
    """(layer, role, shape) for every tensor, in serialization order."""
    specs: list[tuple[str, str, tuple[int, ...]]] = []
    for s in ENCODER:
        specs.append((s.name, "weight", (s.out_channels, s.in_channels, 4, 4)))
        specs.append((s.name, "bias", (s.out_channels,)))
    for s in DECODER:
        specs.append((s.name, "weight", (s.in_channels, s.out_channels, 4, 4)))
        specs.append((s.name, "bias", (s.out_channels,)))
    return specs


class GeneratorModel:
    """Immutable container for one full set of generator parameters."""

    __slots__ = ("_tensors",)

    def __init__(self, tensors: dict[TensorKey, np.ndarray]):
        expected = parameter_specs()
        missing = [f"{l}/{r}" for l, r, _ in expected if (l, r) not in tensors]
        if missing:
            raise ContractError(f"missing generator tensors: {', '.join(missing)}")
        frozen: dict[TensorKey, np.ndarray] = {}
        for layer, role, shape in expected:
            arr = np.ascontiguousarray(tensors[(layer, role)], dtype=np.float32)
            if arr.shape != shape:
                raise ContractError(
                    f"layer {layer} {role} has shape {arr.shape}, expected {shape}"
                )
            arr.flags.writeable = False
            frozen[(layer, role)] = arr
        object.__setattr__(self, "_tensors", frozen)

    def __setattr__(self, name, value):
        raise AttributeError("GeneratorModel is immutable")

    def weight(self, layer: str) -> np.ndarray:
        return self._tensors[(layer, "weight")]

    def bias(self, layer: str) -> np.ndarray:
        return self._tensors[(layer, "bias")]

    def tensors(self) -> dict[TensorKey, np.ndarray]:
        return dict(self._tensors)

    def save(self, path) -> None:
        write_weight_file(
            path, [(l, r, self._tensors[(l, r)]) for l, r, _ in parameter_specs()]
        )


def load_weights(path) -> GeneratorModel:
    """Load and validate a weight file against the architecture table."""
    return GeneratorModel(read_weight_file(path, parameter_specs()))


def zero_generator() -> GeneratorModel:
    """All-zero parameters; forward degenerates to tanh(0), a constant 128 image."""
    return GeneratorModel(
        {(l, r): np.zeros(shape, dtype=np.float32) for l, r, shape in parameter_specs()}
    )


def seeded_generator(seed: int, weight_scale: float = 0.02, bias_scale: float = 0.0) -> GeneratorModel:
    """Deterministic random parameters (normal init), for fixtures and tests."""
    rng = np.random.default_rng(seed)
    tensors = {}
    for layer, role, shape in parameter_specs():
        scale = weight_scale if role == "weight" else bias_scale
        tensors[(layer, role)] = (scale * rng.standard_normal(shape)).astype(np.float32)
    return GeneratorModel(tensors)


def forward_planes(model: GeneratorModel, x: np.ndarray) -> np.ndarray:
    """Run the network on a CHW plane tensor in [-1, 1]; returns the same shape.

    The dtype of `x` (float32 or float64) selects the compute precision.
    """
    if x.ndim != 3 or x.shape[0] != 3:
        raise ContractError(f"expected a (3, H, W) tensor, got {x.shape}")
    dtype = x.dtype

    def w(stage):
        return model.weight(stage.name).astype(dtype, copy=False)

    def b(stage):
        return model.bias(stage.name).astype(dtype, copy=False)

    skips = []
    h = nnops.conv_down(x, w(ENCODER[0]), b(ENCODER[0]))
    skips.append(h)
    for stage in ENCODER[1:]:
        h = nnops.conv_down(nnops.leaky_relu(h), w(stage), b(stage))
        if stage.norm:
            h = nnops.instance_norm(h)
        skips.append(h)

    h = skips.pop()  # innermost encoder activation
    for i, stage in enumerate(DECODER):
        if i > 0:
            h = np.concatenate([skips.pop(), h], axis=0)  # skip channels first
        h = nnops.conv_up(nnops.relu(h), w(stage), b(stage))
        if stage.norm:
            h = nnops.instance_norm(h)
    return nnops.tanh(h)


def forward(model: GeneratorModel, img: ImageBuffer, dtype=np.float32) -> ImageBuffer:
    """Deband one image; width and height must be divisible by 256."""
    if img.width % ALIGN or img.height % ALIGN:
        raise ContractError(
            f"generator input must have dimensions divisible by {ALIGN}, "
            f"got {img.width}x{img.height}; pad the image first"
        )
    x = img.array.astype(dtype).transpose(2, 0, 1) / np.asarray(127.5, dtype=dtype)
    x -= np.asarray(1.0, dtype=dtype)
    y = forward_planes(model, x)
    return ImageBuffer(quantize_u8((y.transpose(1, 2, 0) + 1.0) * 127.5))
