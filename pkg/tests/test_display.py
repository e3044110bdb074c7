import json

import numpy as np
import pytest

from grasslab.appearance import DEFAULT_OPTICS
from grasslab.assets import (
    BUNDLED_ANIMATIONS,
    generate_bundled,
    green_text_animation,
    heart_animation,
    load_bundled,
    wave_animation,
)
from grasslab.calibration import build_table, fit_characteristic
from grasslab.color import Lab
from grasslab.display import (
    Animation,
    AssemblyError,
    Display,
    Frame,
    FrameError,
    GrassModule,
    assemble,
    frames_from_pgm_sequence,
    load_animation,
    make_module,
    play,
    present,
    save_animation,
)


def full_range_table():
    lengths = np.arange(0.0, 20.5, 1.0)
    ogcds = 1.5 * lengths
    labs = [Lab(50.0, 0.0, v) for v in ogcds]
    return build_table(fit_characteristic(lengths, labs, ogcds), 30.0)


def make_display(n_modules: int) -> Display:
    table = full_range_table()
    modules = [make_module(m, DEFAULT_OPTICS) for m in range(n_modules)]
    tables = {p.pixel_id: table for mod in modules for p in mod.pixels}
    return assemble(modules, tables)


def test_module_shape_enforced():
    mod = make_module(0, DEFAULT_OPTICS)
    assert len(mod.pixels) == 16
    with pytest.raises(AssemblyError):
        GrassModule(module_id=0, pixels=mod.pixels[:15])


@pytest.mark.parametrize("n,expected_w", [(1, 2), (2, 4), (4, 8)])
def test_chaining_extends_width(n, expected_w):
    disp = make_display(n)
    assert disp.width == expected_w
    assert disp.height == 8


def test_assemble_requires_tables_for_all_pixels():
    modules = [make_module(0, DEFAULT_OPTICS)]
    with pytest.raises(AssemblyError):
        assemble(modules, {})


def test_assemble_requires_modules():
    with pytest.raises(AssemblyError):
        assemble([], {})


def test_pixel_mapping_row_major_within_module():
    disp = make_display(2)
    # module 0 holds columns 0-1, module 1 columns 2-3
    assert disp.pixel_at(0, 0).pixel_id == 0
    assert disp.pixel_at(0, 1).pixel_id == 1
    assert disp.pixel_at(1, 0).pixel_id == 2
    assert disp.pixel_at(7, 1).pixel_id == 15
    assert disp.pixel_at(0, 2).pixel_id == 16
    assert disp.pixel_at(7, 3).pixel_id == 31


def test_frame_validation():
    Frame.from_array(np.zeros((8, 8), dtype=int))
    with pytest.raises(FrameError):
        Frame.from_array(np.full((8, 8), 256))
    with pytest.raises(FrameError):
        Frame(width=8, height=8, levels=bytes(63))


def test_present_dimension_mismatch():
    disp = make_display(1)
    with pytest.raises(FrameError):
        present(disp, Frame.from_array(np.zeros((8, 8), dtype=int)), 0.1)


def test_present_all_zero_settles_instantly():
    disp = make_display(1)
    settled = present(disp, Frame.from_array(np.zeros((8, 2), dtype=int)), 0.001)
    assert settled.all()


def test_present_full_frame_settles_within_a_second():
    disp = make_display(1)
    settled = present(disp, Frame.from_array(np.full((8, 2), 255)), 1.0)
    assert settled.all()
    assert all(p.motor.position_count == 146 for _, _, p in disp.iter_pixels())


def test_present_short_budget_leaves_pixels_unsettled():
    # full-travel transitions need ~20 ms with the default drivetrain
    disp = make_display(1)
    cb = np.zeros((8, 2), dtype=int)
    cb[::2, 1] = 255
    cb[1::2, 0] = 255
    settled = present(disp, Frame.from_array(cb), 0.005)
    assert not settled.all()
    assert settled.any()  # the pixels commanded to stay at 0 are settled


def test_present_idempotent():
    disp = make_display(1)
    frame = Frame.from_array(np.full((8, 2), 170))
    present(disp, frame, 0.5)
    pvs_first = [p.motor.position_count for _, _, p in disp.iter_pixels()]
    present(disp, frame, 0.5)
    pvs_second = [p.motor.position_count for _, _, p in disp.iter_pixels()]
    assert pvs_first == pvs_second


def test_pixel_independence():
    # changing one pixel's level must not alter any other trajectory
    frame_a = np.full((8, 2), 100)
    frame_b = frame_a.copy()
    frame_b[3, 1] = 200

    disp1 = make_display(1)
    present(disp1, Frame.from_array(frame_a), 0.05)
    disp2 = make_display(1)
    present(disp2, Frame.from_array(frame_b), 0.05)
    for (r, c, p1), (_, _, p2) in zip(disp1.iter_pixels(), disp2.iter_pixels()):
        if (r, c) == (3, 1):
            assert p1.motor.shaft_counts != p2.motor.shaft_counts
        else:
            assert p1.motor.shaft_counts == p2.motor.shaft_counts
            assert p1.motor.position_count == p2.motor.position_count


def test_play_cadence_is_exact():
    disp = make_display(1)
    anim = Animation(fps=10, frames=tuple(Frame.from_array(np.zeros((8, 2), dtype=int)) for _ in range(5)))
    report = play(disp, anim)
    starts = report.frame_start_ticks
    gaps = {b - a for a, b in zip(starts, starts[1:])}
    assert gaps == {100}  # zero jitter in simulated time
    assert report.frame_period_ticks == 100


def test_play_single_frame_equivalent_to_present():
    frame = Frame.from_array(np.full((8, 2), 128))
    disp1 = make_display(1)
    report = play(disp1, Animation(fps=1, frames=(frame,)))
    disp2 = make_display(1)
    settled = present(disp2, frame, 1.0)
    assert report.settled_fraction[0] == pytest.approx(float(settled.mean()))
    pvs1 = [p.motor.position_count for _, _, p in disp1.iter_pixels()]
    pvs2 = [p.motor.position_count for _, _, p in disp2.iter_pixels()]
    assert pvs1 == pvs2


def test_play_deterministic_replay():
    anim = wave_animation()
    rep1 = play(make_display(4), anim)
    rep2 = play(make_display(4), anim)
    assert json.dumps(rep1.as_dict()) == json.dumps(rep2.as_dict())


def test_animation_fps_cap():
    frame = Frame.from_array(np.zeros((8, 8), dtype=int))
    with pytest.raises(ValueError):
        Animation(fps=11, frames=(frame,))
    with pytest.raises(ValueError):
        Animation(fps=0, frames=(frame,))


def test_animation_file_roundtrip(tmp_path):
    anim = wave_animation(n_frames=6)
    path = tmp_path / "wave.anim"
    save_animation(path, anim)
    back = load_animation(path)
    assert back.fps == anim.fps
    assert len(back.frames) == 6
    assert all(a.levels == b.levels for a, b in zip(anim.frames, back.frames))


def test_animation_file_layout_bit_exact(tmp_path):
    frame = Frame.from_array(np.arange(64, dtype=np.uint8).reshape(8, 8))
    path = tmp_path / "one.anim"
    save_animation(path, Animation(fps=10, frames=(frame,)))
    data = path.read_bytes()
    # little-endian u16 w, u16 h, u8 fps, u32 count, then raw levels
    assert data[:9] == bytes([8, 0, 8, 0, 10, 1, 0, 0, 0])
    assert data[9:] == bytes(range(64))


def test_load_animation_rejects_truncated(tmp_path):
    path = tmp_path / "bad.anim"
    path.write_bytes(bytes([8, 0, 8, 0, 10, 2, 0, 0, 0]) + bytes(64))
    with pytest.raises(ValueError):
        load_animation(path)


def test_bundled_assets_match_generators(tmp_path):
    generate_bundled(tmp_path)
    for name in BUNDLED_ANIMATIONS:
        ref = resources_bytes(name)
        assert (tmp_path / f"{name}.anim").read_bytes() == ref


def resources_bytes(name: str) -> bytes:
    from importlib import resources

    return resources.files("grasslab").joinpath(f"assets/{name}.anim").read_bytes()


def test_bundled_assets_load():
    for name, expected_frames in (("wave", 40), ("heart", 26), ("green", 29)):
        anim = load_bundled(name)
        assert anim.fps == 10
        assert (anim.width, anim.height) == (8, 8)
        assert len(anim.frames) == expected_frames


def test_unknown_bundled_name():
    with pytest.raises(KeyError):
        load_bundled("nonexistent")


def test_text_animation_scrolls_right_to_left():
    anim = green_text_animation()
    first_seen = None
    for i, frame in enumerate(anim.frames):
        arr = frame.as_array()
        if arr.any():
            first_seen = (i, np.argwhere(arr.any(axis=0)).ravel())
            break
    assert first_seen is not None
    # glyphs enter on the right edge
    assert first_seen[1].max() == 7


def test_pgm_converter_stub(tmp_path):
    paths = []
    for i in range(3):
        p = tmp_path / f"f{i}.pgm"
        p.write_bytes(b"P5\n8 8\n255\n" + bytes([i * 10] * 64))
        paths.append(p)
    anim = frames_from_pgm_sequence(paths, fps=5)
    assert len(anim.frames) == 3
    assert anim.frames[1].level_at(0, 0) == 10
