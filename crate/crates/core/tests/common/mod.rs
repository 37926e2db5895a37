#![allow(dead_code)]

use polyshift::bijection::{search_basic_bijection, BasicBijection, SearchConfig, SearchOutcome};
use polyshift::geometry::{build_plane, ProjectivePlane};
use polyshift::presentation::{build_presentation, Presentation};

pub fn first_bijection(plane: &ProjectivePlane) -> BasicBijection {
    match search_basic_bijection(plane, &SearchConfig::default()).unwrap().outcome {
        SearchOutcome::Found(t) => t,
        SearchOutcome::Count(_) => unreachable!(),
    }
}

pub fn setup(q: u32) -> (ProjectivePlane, BasicBijection, Presentation) {
    let plane = build_plane(q).unwrap();
    let t = first_bijection(&plane);
    let pres = build_presentation(&plane, &t).unwrap();
    (plane, t, pres)
}
