#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright Contributors to the ipst Project.
"""Exports VGG-19 conv1_1..conv5_1 to IPSTVGG1, with a manifest and an optional
IPSTACT1 activation dump for a probe image.

Sources:
  --checkpoint PATH   torchvision VGG-19 state dict (e.g. vgg19-dcbb9e9d.pth)
  --synthetic SEED    the engine's deterministic synthetic weight set

Examples:
  python3 tools/export_vgg19.py --checkpoint vgg19-dcbb9e9d.pth --out vgg19.ipstvgg
  python3 tools/export_vgg19.py --checkpoint vgg19-dcbb9e9d.pth --out vgg19.ipstvgg \
      --probe tests/fixtures/vgg_probe.png --dump probe_acts.bin

The manifest (<out>.json) records the SHA-256 of the source checkpoint and the
FNV-1a 64 checksum of the exported stream.
"""

import argparse
import hashlib
import importlib.util
import json
import pathlib
import struct
import sys

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent
FIXTURE_SCRIPT = HERE.parent / "tests" / "fixtures" / "make_vgg_probe.py"

# torchvision's features.N index for each exported conv.
TORCHVISION_INDEX = {
    "conv1_1": 0, "conv1_2": 2, "conv2_1": 5, "conv2_2": 7,
    "conv3_1": 10, "conv3_2": 12, "conv3_3": 14, "conv3_4": 16,
    "conv4_1": 19, "conv4_2": 21, "conv4_3": 23, "conv4_4": 25, "conv5_1": 28,
}


def load_fixture_helpers():
    module_spec = importlib.util.spec_from_file_location("make_vgg_probe", FIXTURE_SCRIPT)
    module = importlib.util.module_from_spec(module_spec)
    module_spec.loader.exec_module(module)
    return module


def checkpoint_layers(path, schema):
    import torch

    state = torch.load(path, map_location="cpu", weights_only=True)
    layers = []
    for name, in_c, out_c in schema:
        idx = TORCHVISION_INDEX[name]
        w = state[f"features.{idx}.weight"].numpy().astype(np.float32)
        b = state[f"features.{idx}.bias"].numpy().astype(np.float32)
        if w.shape != (out_c, in_c, 3, 3) or b.shape != (out_c,):
            sys.exit(f"{name}: unexpected shape {tuple(w.shape)} / {tuple(b.shape)}")
        layers.append((name, w, b))
    return layers


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--checkpoint", type=pathlib.Path)
    source.add_argument("--synthetic", type=int, metavar="SEED")
    parser.add_argument("--out", type=pathlib.Path, required=True)
    parser.add_argument("--probe", type=pathlib.Path, help="RGB probe image for an activation dump")
    parser.add_argument("--dump", type=pathlib.Path, help="IPSTACT1 output path (requires --probe)")
    args = parser.parse_args()
    if (args.probe is None) != (args.dump is None):
        parser.error("--probe and --dump go together")

    helpers = load_fixture_helpers()
    if args.checkpoint is not None:
        layers = checkpoint_layers(args.checkpoint, helpers.SCHEMA)
        source_info = {"kind": "checkpoint", "file": args.checkpoint.name,
                       "sha256": hashlib.sha256(args.checkpoint.read_bytes()).hexdigest()}
    else:
        layers = helpers.synthetic_weights(args.synthetic)
        source_info = {"kind": "synthetic", "seed": args.synthetic}

    stream = helpers.ipstvgg1_bytes(layers)
    args.out.write_bytes(stream)
    manifest = {
        "source": source_info,
        "fnv1a64": f"{helpers.fnv1a64(stream):016x}",
        "layers": [{"name": n, "shape": list(w.shape)} for n, w, _ in layers],
    }

    if args.probe is not None:
        import torch
        from PIL import Image

        torch.set_num_threads(1)
        image = np.asarray(Image.open(args.probe).convert("RGB"))
        taps = helpers.activations(image, layers)
        dump = bytearray(b"IPSTACT1") + struct.pack("<I", len(taps))
        for block in sorted(taps):
            t = taps[block].numpy().astype("<f4")
            dump += struct.pack("<5I", block, *t.shape) + t.tobytes()
        args.dump.write_bytes(bytes(dump))
        manifest["dump"] = {"file": args.dump.name, "probe": args.probe.name,
                            "taps": {f"relu{b}_1": list(taps[b].shape) for b in sorted(taps)}}

    pathlib.Path(str(args.out) + ".json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
