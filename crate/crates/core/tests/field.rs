use gwn_orient::field::{laplacian_residual, render, sample_field, stencil_laplacian, ScalarGrid};
use gwn_orient::fixtures;
use gwn_orient::patching::extract_patches;
use gwn_orient::winding::{winding_number, SignAssignment};
use gwn_orient::{Dimension, Error, Vec3};

fn constant_grid(value: f64, resolution: usize) -> ScalarGrid {
    ScalarGrid {
        dimension: 2,
        resolution,
        origin: vec![0.0, 0.0],
        spacing: 1.0,
        counts: vec![resolution; 2],
        values: vec![value; resolution * resolution],
        mask: vec![false; resolution * resolution],
    }
}

fn pixels(image: &[u8]) -> Vec<[u8; 3]> {
    let mut newlines = 0;
    let start = image.iter().position(|&b| {
        newlines += usize::from(b == b'\n');
        newlines == 3
    });
    image[start.unwrap() + 1..].chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
}

#[test]
fn square_field_is_an_indicator() {
    let sq = fixtures::unit_square();
    let d = extract_patches(&sq).unwrap();
    let grid = sample_field(&sq, &d, &SignAssignment::all_positive(1), 64, 2.0).unwrap();
    let mut inside = 0;
    for iy in 0..64 {
        for ix in 0..64 {
            let Some(v) = grid.get(ix, iy, 0) else { continue };
            let c = grid.cell_center(ix, iy, 0);
            let interior = (0.0..1.0).contains(&c.x) && (0.0..1.0).contains(&c.y);
            let want = if interior { 1.0 } else { 0.0 };
            inside += usize::from(interior);
            assert!((v - want).abs() < 1e-6, "({ix},{iy}) = {v}");
        }
    }
    assert!(inside > 0);
    let negated = sample_field(&sq, &d, &SignAssignment::new(vec![-1]).unwrap(), 64, 2.0).unwrap();
    for (a, b) in grid.values.iter().zip(&negated.values) {
        assert_eq!(*a, -b);
    }
}

#[test]
fn open_segment_never_reaches_half() {
    let seg = fixtures::polylines(&[(vec![[0.0, 0.0], [1.0, 0.0]], false)]);
    let d = extract_patches(&seg).unwrap();
    let grid = sample_field(&seg, &d, &SignAssignment::all_positive(1), 64, 3.0).unwrap();
    let (lo, hi) = grid.range().unwrap();
    assert!(lo > -0.5 && hi < 0.5, "{lo} {hi}");
}

#[test]
fn cube_grid_is_three_dimensional() {
    let cube = fixtures::unit_cube();
    let d = extract_patches(&cube).unwrap();
    let grid = sample_field(&cube, &d, &SignAssignment::all_positive(1), 8, 2.0).unwrap();
    assert_eq!(grid.counts, vec![8, 8, 8]);
    assert_eq!(grid.values.len(), 512);
    let centre = grid.get(3, 3, 3).or(grid.get(4, 4, 4)).unwrap();
    assert!((centre - 1.0).abs() < 1e-9);
    assert!(grid.get(0, 0, 0).unwrap().abs() < 1e-9);
    assert!(matches!(render(&grid, 0.0, 1.0), Err(Error::Config(_))));
}

#[test]
fn sampling_rejects_bad_arguments() {
    let sq = fixtures::unit_square();
    let d = extract_patches(&sq).unwrap();
    let s = SignAssignment::all_positive(1);
    assert!(matches!(sample_field(&sq, &d, &s, 0, 2.0), Err(Error::Config(_))));
    assert!(matches!(sample_field(&sq, &d, &s, 8, 0.0), Err(Error::Config(_))));
    let two = SignAssignment::all_positive(2);
    assert!(matches!(sample_field(&sq, &d, &two, 8, 2.0), Err(Error::SizeMismatch { .. })));
}

#[test]
fn constant_field_renders_one_colour() {
    let image = render(&constant_grid(0.5, 5), 0.0, 1.0).unwrap();
    assert!(image.starts_with(b"P6\n5 5\n255\n"));
    let px = pixels(&image);
    assert_eq!(px.len(), 25);
    assert!(px.iter().all(|p| *p == px[0]));
}

#[test]
fn values_outside_the_clamp_saturate() {
    let lo = pixels(&render(&constant_grid(-7.0, 2), 0.0, 1.0).unwrap());
    let at_lo = pixels(&render(&constant_grid(0.0, 2), 0.0, 1.0).unwrap());
    let hi = pixels(&render(&constant_grid(9.0, 2), 0.0, 1.0).unwrap());
    let at_hi = pixels(&render(&constant_grid(1.0, 2), 0.0, 1.0).unwrap());
    assert_eq!(lo, at_lo);
    assert_eq!(hi, at_hi);
    assert_ne!(lo, hi);
}

#[test]
fn ramp_renders_monotone_channels() {
    let r = 16;
    let mut grid = constant_grid(0.0, r);
    for iy in 0..r {
        for ix in 0..r {
            grid.values[iy * r + ix] = ix as f64 / (r - 1) as f64;
        }
    }
    let px = pixels(&render(&grid, 0.0, 1.0).unwrap());
    let row = &px[..r];
    for w in row.windows(2) {
        assert!(w[1][0] >= w[0][0] && w[1][1] <= w[0][1] && w[1][2] <= w[0][2]);
    }
    assert_ne!(row[0], row[r - 1]);
}

#[test]
fn masked_cells_are_black_and_image_is_y_up() {
    let mut grid = constant_grid(1.0, 2);
    grid.values[0] = 0.0;
    grid.mask[3] = true;
    let px = pixels(&render(&grid, 0.0, 1.0).unwrap());
    // top row is iy = 1: cells 2 and 3
    assert_eq!(px[1], [0, 0, 0]);
    assert_ne!(px[2], px[3]);
}

#[test]
fn clamp_range_must_be_increasing() {
    let grid = constant_grid(0.0, 2);
    assert!(matches!(render(&grid, 1.0, 0.0), Err(Error::BadClampRange { .. })));
    assert!(matches!(render(&grid, 0.5, 0.5), Err(Error::BadClampRange { .. })));
}

#[test]
fn stencil_is_exact_on_affine_and_quadratic_functions() {
    let p = Vec3::new(0.3, -1.2, 0.0);
    let affine = stencil_laplacian(Dimension::Two, &p, 1e-2, |q| 3.0 * q.x - 2.0 * q.y + 0.5);
    assert!(affine.abs() < 1e-10, "{affine}");
    let quad = stencil_laplacian(Dimension::Three, &Vec3::new(0.1, 0.2, 0.3), 1e-2, |q| q.norm_squared());
    assert!((quad - 6.0).abs() < 1e-8, "{quad}");
}

#[test]
fn residual_decays_quadratically_with_step() {
    let mesh = fixtures::gapped_circle(3, 6, 1.0, 0.2);
    let d = extract_patches(&mesh).unwrap();
    let s = SignAssignment::all_positive(3);
    let p = [Vec3::new(0.2, 0.3, 0.0)];
    let coarse = laplacian_residual(&mesh, &d, &s, &p, 4e-3).unwrap()[0].abs();
    let fine = laplacian_residual(&mesh, &d, &s, &p, 2e-3).unwrap()[0].abs();
    assert!(fine < coarse / 3.0, "{coarse} -> {fine}");
}

#[test]
fn residual_matches_winding_number_stencil() {
    let sq = fixtures::unit_square();
    let d = extract_patches(&sq).unwrap();
    let s = SignAssignment::all_positive(1);
    let p = Vec3::new(0.4, 0.6, 0.0);
    let direct = stencil_laplacian(Dimension::Two, &p, 1e-3, |q| winding_number(&sq, &d, &s, q).unwrap());
    let r = laplacian_residual(&sq, &d, &s, &[p], 1e-3).unwrap()[0];
    assert!((r - direct).abs() < 1e-9);
    assert!(matches!(laplacian_residual(&sq, &d, &s, &[p], 0.0), Err(Error::Config(_))));
}
