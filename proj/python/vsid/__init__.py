"""Speaker identification with LP-residual autocorrelation (ACRLAG) and GMMs."""

from ._vsid import (
    GmmModel,
    SpeakerDatabase,
    VsidError,
    acrlag_feature,
    autocorr,
    extract,
    fuse,
    levinson_durbin,
    lp_residual,
    lp_synthesize,
    lpcc,
    lsf,
    normalize_residual,
    prepare_frames,
    read_wav,
    synth_corpus,
    train_database,
    train_gmm,
    write_wav,
)

__all__ = [
    "GmmModel",
    "SpeakerDatabase",
    "VsidError",
    "acrlag_feature",
    "autocorr",
    "extract",
    "fuse",
    "levinson_durbin",
    "lp_residual",
    "lp_synthesize",
    "lpcc",
    "lsf",
    "normalize_residual",
    "prepare_frames",
    "read_wav",
    "synth_corpus",
    "train_database",
    "train_gmm",
    "write_wav",
]
