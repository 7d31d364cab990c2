//! Hand-built diagrams used as regression fixtures.

use crate::diagram::{FloorDiagram, Node, Template, Weights};

fn build(nodes: Vec<Node>, l_attach: Vec<usize>, r_attach: Vec<usize>, weights: Weights) -> FloorDiagram {
    let t = Template::new(nodes, l_attach, r_attach).expect("fixture indices are in range");
    FloorDiagram::new(t, weights).expect("fixture weights match the template")
}

/// Genus 1, three floors, `k = 2`, bidegree (3,4), multiplicity 6.
pub fn figure1() -> FloorDiagram {
    use Node::*;
    build(
        vec![
            White { div: -1, black: 1 },
            Black,
            White { div: 2, black: 1 },
            Gray { source: 1, target: 6 },
            Gray { source: 1, target: 10 },
            White { div: -3, black: 6 },
            Black,
            White { div: 1, black: 6 },
            Gray { source: 6, target: 10 },
            White { div: -1, black: 10 },
            Black,
        ],
        vec![1, 1, 1],
        vec![10],
        Weights {
            l: vec![2, 2, 1],
            r: vec![1],
            white: vec![1, 2, 3, 1, 1],
            gray: vec![[1, 1]; 3],
        },
    )
}

/// `N_0^{0,01,0,0}(2,0,1)`: a free white of divergence −2 before two floors.
pub fn figure2a() -> FloorDiagram {
    build(
        vec![Node::White { div: -2, black: 1 }, Node::Black, Node::Gray { source: 1, target: 3 }, Node::Black],
        vec![],
        vec![],
        Weights { l: vec![], r: vec![], white: vec![2], gray: vec![[1, 1]] },
    )
}

/// `N_0^{01,0,0,0}(2,0,1)`: one left label of divergence −2.
pub fn figure2b() -> FloorDiagram {
    build(
        vec![Node::Black, Node::Gray { source: 0, target: 2 }, Node::Black],
        vec![0],
        vec![],
        Weights { l: vec![2], r: vec![], white: vec![], gray: vec![[1, 1]] },
    )
}

/// `N_0^{01,0,0,01}(2,2,0)`: the gray edges carry weight 2.
pub fn figure2c() -> FloorDiagram {
    build(
        vec![Node::Black, Node::Gray { source: 0, target: 2 }, Node::Black, Node::White { div: 2, black: 2 }],
        vec![0],
        vec![],
        Weights { l: vec![2], r: vec![], white: vec![2], gray: vec![[2, 2]] },
    )
}

/// One floor with a single left label of weight `k`.
pub fn single_black(k: u64) -> FloorDiagram {
    build(vec![Node::Black], vec![0], vec![], Weights { l: vec![k], r: vec![], white: vec![], gray: vec![] })
}
