"""Color math walkthrough: linear RGB -> XYZ -> Lab, and CIEDE2000 distances.

The measurement pipeline quantifies every grass color as a CIELAB value
(D50 white, matching the linear working space) and compares colors with
CIEDE2000, which tracks perceived difference far better than Euclidean
Lab distance.
"""

from grasslab import D50, Lab, LinearRgb, ciede2000, rgb_to_xyz, xyz_to_lab

print("White and black are the anchors of the space:")
for name, rgb in [("white", (1, 1, 1)), ("black", (0, 0, 0)), ("mid gray", (0.18, 0.18, 0.18))]:
    lab = xyz_to_lab(rgb_to_xyz(LinearRgb(*rgb)), D50)
    print(f"  {name:>8}: L*={lab.l_star:6.2f}  a*={lab.a_star:+6.3f}  b*={lab.b_star:+6.3f}")

print()
print("A one-JND pair (the formula is tuned so ~1.0 means 'just noticeable'):")
a = Lab(50.0, 2.5, 0.0)
b = Lab(50.0, 3.2972, 0.0)
print(f"  dE00 = {ciede2000(a, b):.4f}")

print()
print("Distances between a dying-yellow and a lively-green grass color")
print("(the camera colors of one pixel at 0 mm and at full 20 mm travel):")
yellow = xyz_to_lab(rgb_to_xyz(LinearRgb(0.649, 0.584, 0.307)), D50)
green = xyz_to_lab(rgb_to_xyz(LinearRgb(0.164, 0.190, 0.096)), D50)
print(f"  yellow: L*={yellow.l_star:.1f} a*={yellow.a_star:+.1f} b*={yellow.b_star:+.1f}")
print(f"  green:  L*={green.l_star:.1f} a*={green.a_star:+.1f} b*={green.b_star:+.1f}")
print(f"  dE00(yellow, green) = {ciede2000(yellow, green):.2f}")
print()
print("That full-range distance (~30) is what one pixel's travel spans;")
print("the calibration divides it into 256 perceptually even steps.")
