from .channel import SceneConfig, body_path, channel_response, synthesize_csi
from .clip import KINDS, VideoClip
from .dataset import (
    CONFIG_FILE,
    CSI_FILE,
    Pair,
    generate_dataset,
    generate_sample,
    load_csi_only,
    load_clips,
    load_dataset,
    packet_timestamps,
    read_clip,
    sample_dir,
    write_clip,
    write_dataset,
)
from .netpbm import decode_frame, encode_frame, read_frame, write_frame
from .pose import BONES, JOINTS, Pose, pose_trajectory
from .render import BONE_COLORS, render, render_silhouette, render_skeleton
