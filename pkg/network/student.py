from tensor_engine import LSTM, ConvTranspose3d, Module, Tensor

from .plan import LayerPlan
from .teacher import VideoDecoder


class SignalEncoder(Module):
    """LSTM over the P amplitude rows; the last hidden state summarises the sequence."""

    def __init__(self, plan: LayerPlan):
        super().__init__()
        self.lstm = LSTM(plan.n_sub, plan.hidden)
        self._scale = plan.amplitude_scale

    def forward(self, a: Tensor) -> Tensor:
        return self.lstm(a * (1.0 / self._scale))


class StudentModel(Module):
    """Signal encoder plus a lift into the latent volume; decoding borrows the teacher's decoder."""

    def __init__(self, plan: LayerPlan, decoder: VideoDecoder):
        super().__init__()
        self.encoder = SignalEncoder(plan)
        # stride 1 with a kernel the size of the latent volume turns (D, 1, 1, 1) into the latent block
        self.lift = ConvTranspose3d(plan.hidden, plan.latent[0], plan.latent[1:], 1)
        self._decoder = decoder
        self._hidden = plan.hidden

    def lift_to_visual(self, h: Tensor) -> Tensor:
        return self.lift(h.reshape(h.shape[0], self._hidden, 1, 1, 1))

    def forward(self, a: Tensor) -> Tensor:
        return self._decoder(self.lift_to_visual(self.encoder(a)))
