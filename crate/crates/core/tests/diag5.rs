use cafebot_core::eval::{default_start, exploration_tour, TOUR_WAYPOINTS};
use cafebot_core::mem::{EnvironmentMemory, MemoryFlags};
use cafebot_core::simworld::load_scene;

#[test]
fn diag_fixture_localization() {
    let scene = load_scene(include_bytes!("../fixtures/cafe_small.json")).unwrap();
    let mut robot = default_start(&scene);
    let mut mem = EnvironmentMemory::new(scene.bounds, MemoryFlags::default());
    exploration_tour(&scene, &mut robot, &mut mem, TOUR_WAYPOINTS);
    for obj in &scene.objects {
        match mem.language.get(&obj.id) {
            None => println!("{:>2} {:<16} NOT SEEN", obj.id, obj.category.name()),
            Some(e) => {
                let p = e.world_pos;
                let lo = obj.box_min();
                let hi = obj.box_max();
                let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
                let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
                let dz = (lo.z - p.z).max(0.0).max(p.z - hi.z);
                let dist = (dx * dx + dy * dy + dz * dz).sqrt();
                let flag = if dist > 0.05 { "  <-- OFF" } else { "" };
                println!("{:>2} {:<16} box-dist {:.4}{}", obj.id, obj.category.name(), dist, flag);
            }
        }
    }
}
