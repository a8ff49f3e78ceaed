"""Contact-sheet rendering of a key-frame summary.

Tiles are laid out left-to-right, top-to-bottom in increasing frame
index (temporal order), trailing cells filled black. Frames keep their
native resolution unless a tile size is given, in which case they are
box-filtered down for reproducible output. PNG encoding settings are
fixed so re-rendering the same summary is byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from PIL import Image

from .errors import MissingFrameError
from .ingest import FrameSequence
from .vidrank import Summary


@dataclass
class Storyboard:
    summary: Summary
    tile_width: int
    tile_height: int
    columns: int
    rows: int
    sheet_path: Path
    keyframe_paths: list[Path]
    summary_path: Path


def render_contact_sheet(
    summary: Summary,
    frames: FrameSequence,
    out_dir: Path | str,
    *,
    columns: int = 5,
    tile_size: tuple[int, int] | None = None,
) -> Storyboard:
    """Write the montage PNG, one PNG per key frame, and the summary JSON.

    Outputs are ``<source_id>_storyboard.png``,
    ``<source_id>_kf_<frame_index>.png`` and ``<source_id>_summary.json``.

    Raises:
        MissingFrameError: a key-frame index is absent from `frames`.
        OSError: the output location is not writable.
    """
    if columns < 1:
        raise ValueError("columns must be at least 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = summary.source_id or frames.source_id or "summary"

    by_index = frames.by_index()
    ordered = sorted(summary.key_frames, key=lambda kf: kf.frame_index)
    tiles = []
    for kf in ordered:
        frame = by_index.get(kf.frame_index)
        if frame is None:
            raise MissingFrameError(
                f"key frame index {kf.frame_index} not present in sequence {name!r}"
            )
        tiles.append((kf.frame_index, Image.fromarray(frame.pixels)))

    if tile_size is not None:
        tw, th = tile_size
        tiles = [(idx, img.resize((tw, th), Image.BOX)) for idx, img in tiles]
    else:
        tw, th = frames.width, frames.height

    k = len(tiles)
    rows = max(1, math.ceil(k / columns))
    sheet = Image.new("RGB", (columns * tw, rows * th), (0, 0, 0))

    keyframe_paths = []
    for cell, (idx, img) in enumerate(tiles):
        r, c = divmod(cell, columns)
        sheet.paste(img, (c * tw, r * th))
        kf_path = out_dir / f"{name}_kf_{idx}.png"
        img.save(kf_path, format="PNG")
        keyframe_paths.append(kf_path)

    sheet_path = out_dir / f"{name}_storyboard.png"
    sheet.save(sheet_path, format="PNG")

    summary_path = out_dir / f"{name}_summary.json"
    summary_path.write_text(json.dumps(summary.to_json(), indent=2) + "\n")

    return Storyboard(
        summary=summary,
        tile_width=tw,
        tile_height=th,
        columns=columns,
        rows=rows,
        sheet_path=sheet_path,
        keyframe_paths=keyframe_paths,
        summary_path=summary_path,
    )
