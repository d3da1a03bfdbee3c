import logging

from tensor_engine import BatchNorm3d, Conv3d, ConvTranspose3d, Module, Tensor, crop3d, pad3d

from .plan import LayerPlan

logger = logging.getLogger("Network")


class DownBlock(Module):
    """pad -> strided conv -> batch norm -> leaky ReLU."""

    def __init__(self, plan: LayerPlan, in_maps: int, out_maps: int):
        super().__init__()
        self.conv = Conv3d(in_maps, out_maps, plan.kernel, plan.stride)
        self.norm = BatchNorm3d(out_maps, plan.bn_momentum, plan.bn_eps)
        self._pad = plan.padding
        self._slope = plan.leaky_slope

    def forward(self, x: Tensor) -> Tensor:
        return self.norm(self.conv(pad3d(x, self._pad))).leaky_relu(self._slope)


class UpBlock(Module):
    """strided transposed conv -> crop -> batch norm -> ReLU."""

    def __init__(self, plan: LayerPlan, in_maps: int, out_maps: int):
        super().__init__()
        self.conv = ConvTranspose3d(in_maps, out_maps, plan.kernel, plan.stride)
        self.norm = BatchNorm3d(out_maps, plan.bn_momentum, plan.bn_eps)
        self._crop = plan.padding

    def forward(self, x: Tensor) -> Tensor:
        return self.norm(crop3d(self.conv(x), self._crop)).relu()


class VideoEncoder(Module):
    def __init__(self, plan: LayerPlan):
        super().__init__()
        widths = (plan.in_channels,) + plan.channels
        self.blocks = [DownBlock(plan, a, b) for a, b in zip(widths[:-1], widths[1:])]

    def forward(self, x: Tensor) -> Tensor:
        for block in self.blocks:
            x = block(x)
        return x


class VideoDecoder(Module):
    """Mirror of the encoder followed by a 1x1x1 transposed conv to pixel channels and tanh."""

    def __init__(self, plan: LayerPlan):
        super().__init__()
        widths = plan.channels[::-1] + (plan.channels[0],)
        self.blocks = [UpBlock(plan, a, b) for a, b in zip(widths[:-1], widths[1:])]
        self.to_pixels = ConvTranspose3d(plan.channels[0], plan.in_channels, 1, 1)

    def forward(self, z: Tensor) -> Tensor:
        for block in self.blocks:
            z = block(z)
        return self.to_pixels(z).tanh()


class Discriminator(Module):
    """Encoder-shaped trunk, then one conv spanning the whole latent volume and a sigmoid."""

    def __init__(self, plan: LayerPlan):
        super().__init__()
        widths = (plan.in_channels,) + plan.channels
        self.blocks = [DownBlock(plan, a, b) for a, b in zip(widths[:-1], widths[1:])]
        self.head = Conv3d(plan.channels[-1], 1, plan.latent[1:], 1)

    def forward(self, x: Tensor) -> Tensor:
        for block in self.blocks:
            x = block(x)
        logits = self.head(x)
        return logits.reshape(logits.shape[0]).sigmoid()
