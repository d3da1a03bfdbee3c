from .model import CrossModalNet, clips_to_tensor, matrices_to_tensor, tensor_to_clips
from .plan import HIDDEN_SIZES, LayerPlan
from .student import SignalEncoder, StudentModel
from .teacher import Discriminator, DownBlock, UpBlock, VideoDecoder, VideoEncoder
