import json
import os
import string

from trulr.harness.presets import preset_dict


def letter_features(label, wobble=0):
    """16 features that separate all 26 classes; wobble moves the first one by +-1."""
    features = [label % 16] * 8 + [15 * (label // 16)] * 8
    if wobble:
        features[0] = min(max(features[0] + wobble, 0), 15)
    return features


def write_letter_dataset(path, per_class=6):
    """A tiny, perfectly separable letter-recognition file."""
    lines = []
    for i in range(per_class):
        for label, letter in enumerate(string.ascii_uppercase, start=1):
            wobble = (i % 3) - 1
            features = letter_features(label, wobble)
            lines.append(letter + "," + ",".join(str(v) for v in features))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    return path


def quick_config_dict(out_dir, **overrides):
    """beta_i with tiny grids; fast enough for unit tests."""
    data = preset_dict("beta_i")
    data.update(
        {
            "n_grid": [200, 400],
            "reps": 20,
            "seed": 3,
            "delta_grid": [0.1, 0.5],
            "out_dir": str(out_dir),
        }
    )
    data.update(overrides)
    return data


def write_json(path, data):
    with open(path, "w") as f:
        json.dump(data, f)
    return str(path)


def read_lines(path):
    with open(path) as f:
        return f.read().splitlines()


def listdir(path):
    return sorted(name for name in os.listdir(path) if not name.startswith("."))
