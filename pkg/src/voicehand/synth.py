"""Synthetic tone datasets for end-to-end checks.

Writes a dataset tree in the same layout the real corpus uses (word
folders, _background_noise_, validation/testing list files), with each
"word" being a pure sine tone of a fixed frequency and randomized
amplitude and phase. Three well-separated tones are linearly separable
in spectrogram space, so a correct pipeline must learn them quickly;
a broken one cannot hide.
"""

from pathlib import Path

import numpy as np

from .audio import WINDOW_SAMPLES
from .rng import substream
from .wav import SAMPLE_RATE, write_wav

TONE_FREQS = {"zero": 500.0, "one": 2000.0, "two": 6000.0}

AMPLITUDE_RANGE = (0.2, 0.9)
NOISE_FILES = 2
NOISE_SECONDS = 3
NOISE_AMPLITUDE = 0.1


def tone_samples(freq_hz: float, amplitude: float, phase: float,
                 n_samples: int = WINDOW_SAMPLES) -> np.ndarray:
    """One sine tone as signed 16-bit PCM."""
    t = np.arange(n_samples) / SAMPLE_RATE
    wave = amplitude * np.sin(2.0 * np.pi * freq_hz * t + phase)
    return np.round(wave * 32767.0).astype(np.int16)


def write_tone_dataset(root, class_freqs: dict = None, clips_per_class: int = 200,
                       seed: int = 17, val_fraction: float = 0.15,
                       test_fraction: float = 0.10) -> Path:
    """Materialize the dataset under `root` and return it.

    Every clip is exactly one second. Split membership is an exact count
    per class (val/test fractions rounded to integers), drawn with a
    seeded shuffle so the tree is reproducible.
    """
    root = Path(root)
    class_freqs = class_freqs or TONE_FREQS
    val_lines = []
    test_lines = []
    lo, hi = AMPLITUDE_RANGE
    for word, freq in sorted(class_freqs.items()):
        rng = substream(seed, "synth", word)
        (root / word).mkdir(parents=True, exist_ok=True)
        names = []
        for i in range(clips_per_class):
            amplitude = rng.uniform(lo, hi)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            name = f"{word}/clip_{i:04d}.wav"
            write_wav(root / name, tone_samples(freq, amplitude, phase))
            names.append(name)
        order = rng.permutation(len(names))
        n_val = int(round(clips_per_class * val_fraction))
        n_test = int(round(clips_per_class * test_fraction))
        val_lines += [names[i] for i in order[:n_val]]
        test_lines += [names[i] for i in order[n_val : n_val + n_test]]

    noise_dir = root / "_background_noise_"
    noise_dir.mkdir(parents=True, exist_ok=True)
    noise_rng = substream(seed, "synth", "noise")
    for i in range(NOISE_FILES):
        noise = noise_rng.uniform(-NOISE_AMPLITUDE, NOISE_AMPLITUDE,
                                  size=NOISE_SECONDS * SAMPLE_RATE)
        write_wav(noise_dir / f"white_{i}.wav", np.round(noise * 32767.0).astype(np.int16))

    (root / "validation_list.txt").write_text("".join(line + "\n" for line in sorted(val_lines)))
    (root / "testing_list.txt").write_text("".join(line + "\n" for line in sorted(test_lines)))
    return root
