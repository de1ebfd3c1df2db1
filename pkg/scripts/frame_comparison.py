"""Lab versus moving-frame spectra over grid sizes and masses, including the misaligned
window and the single-exponential form for contrast."""
import argparse

from kickspin.mobile_spin import GridSpec, compare_frames


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="16,32,64")
    p.add_argument("--masses", default="0.5,1,5")
    args = p.parse_args()
    print("N,mass,spectral,conjugated,misaligned,single_exponential")
    for n in (int(x) for x in args.sizes.split(",")):
        for mass in (float(x) for x in args.masses.split(",")):
            g = GridSpec(n, mass=mass)
            d = [
                compare_frames(g, "spectral").matching_distance,
                compare_frames(g, "conjugated").matching_distance,
                compare_frames(g, "spectral", "misaligned").matching_distance,
                compare_frames(g, "spectral", form="single_exponential").matching_distance,
            ]
            print(f"{n},{mass:g}," + ",".join(f"{x:.3e}" for x in d))


if __name__ == "__main__":
    main()
