"""Regenerate the golden bit-pattern files for the deterministic kernels.

Each file holds 1000 lines of "input_bits output_bits" in hex, computed by
the pure-Python reference.  The goldens freeze today's exact bits so that
any later environment -- new interpreter, new compiler, new machine -- can
prove it still computes the same streams.  Rewriting them is only legitimate
when the kernels' contract itself deliberately changes.

Usage: python scripts/gen_golden.py [output_dir]
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from lockstep.detmath import _reference as ref

COUNT = 1000


def u64_stream(seed):
    state = seed
    while True:
        value, state = ref.mix64(state)
        yield value


def unit_stream(seed):
    for v in u64_stream(seed):
        yield (v >> 11) * 2.0 ** -53


def trig_inputs():
    out = [0.0, -0.0, 1.0, -1.0, 1.5707963267948966, 3.141592653589793, 1e6, -1e6, 1e300]
    units = unit_stream(101)
    while len(out) < COUNT:
        u = next(units)
        out.append((u - 0.5) * 100.0)
    return out[:COUNT]


def exp_inputs():
    out = [0.0, -0.0, 1.0, -1.0, 746.0, -746.0, 747.0, -747.0, 709.78, -745.0]
    units = unit_stream(202)
    while len(out) < COUNT:
        u = next(units)
        if len(out) % 3 == 0:
            out.append((u - 0.5) * 1500.0)
        else:
            out.append((u - 0.5) * 40.0)
    return out[:COUNT]


def ln_inputs():
    out = [1.0, 2.0, 0.5, 1e-308, 5e-324, 1.7976931348623157e308, 2.2250738585072014e-308]
    units = unit_stream(303)
    while len(out) < COUNT:
        u = next(units)
        # log-uniform across the whole positive range
        out.append(ref.det_exp((u - 0.5) * 1400.0) or 5e-324)
    return out[:COUNT]


def write(path, fn, inputs):
    lines = []
    for x in inputs:
        lines.append(f"{ref.float_bits(x):016x} {ref.float_bits(fn(x)):016x}")
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(inputs)} pairs)")


def main():
    out_dir = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else (
        pathlib.Path(__file__).resolve().parent.parent / "tests" / "golden"
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    trig = trig_inputs()
    write(out_dir / "det_sin.txt", ref.det_sin, trig)
    write(out_dir / "det_cos.txt", ref.det_cos, trig)
    write(out_dir / "det_tan.txt", ref.det_tan, trig)
    write(out_dir / "det_exp.txt", ref.det_exp, exp_inputs())
    write(out_dir / "det_ln.txt", ref.det_ln, ln_inputs())

    mix_lines = []
    state = 0
    for _ in range(COUNT):
        value, state = ref.mix64(state)
        mix_lines.append(f"{value:016x} {state:016x}")
    (out_dir / "mix64.txt").write_text("\n".join(mix_lines) + "\n")
    print(f"wrote {out_dir / 'mix64.txt'} ({COUNT} pairs)")


if __name__ == "__main__":
    main()
