//! Connectivity cleanup: every output label is one 4-connected region, and
//! fragments below a size threshold are absorbed by their largest neighbour.

use std::collections::VecDeque;

/// Returns the compacted label map and the number of regions. Labels are
/// numbered by the raster-order first appearance of their region.
pub(super) fn enforce(labels: &[u32], height: usize, width: usize, min_size: usize) -> (Vec<u32>, usize) {
    let n = height * width;
    let mut comp = vec![u32::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = members.len() as u32;
        let mut pixels = vec![start];
        comp[start] = id;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for j in neighbours(i, height, width) {
                if comp[j] == u32::MAX && labels[j] == labels[start] {
                    comp[j] = id;
                    pixels.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.push(pixels);
    }

    let count = members.len();
    let mut parent: Vec<usize> = (0..count).collect();
    let mut size: Vec<usize> = members.iter().map(Vec::len).collect();

    for c in 0..count {
        if find(&mut parent, c) != c || size[c] >= min_size {
            continue;
        }
        let mut target: Option<usize> = None;
        for &i in &members[c] {
            for j in neighbours(i, height, width) {
                let r = find(&mut parent, comp[j] as usize);
                if r == c {
                    continue;
                }
                target = match target {
                    Some(t) if size[t] > size[r] || (size[t] == size[r] && t < r) => Some(t),
                    _ => Some(r),
                };
            }
        }
        if let Some(t) = target {
            parent[c] = t;
            size[t] += size[c];
            let moved = std::mem::take(&mut members[c]);
            members[t].extend(moved);
        }
    }

    let mut remap = vec![u32::MAX; count];
    let mut next = 0u32;
    let mut out = vec![0u32; n];
    for i in 0..n {
        let r = find(&mut parent, comp[i] as usize);
        if remap[r] == u32::MAX {
            remap[r] = next;
            next += 1;
        }
        out[i] = remap[r];
    }
    (out, next as usize)
}

fn find(parent: &mut [usize], mut c: usize) -> usize {
    while parent[c] != c {
        parent[c] = parent[parent[c]];
        c = parent[c];
    }
    c
}

fn neighbours(i: usize, height: usize, width: usize) -> impl Iterator<Item = usize> {
    let (y, x) = (i / width, i % width);
    let up = (y > 0).then(|| i - width);
    let down = (y + 1 < height).then(|| i + width);
    let left = (x > 0).then(|| i - 1);
    let right = (x + 1 < width).then(|| i + 1);
    [up, left, right, down].into_iter().flatten()
}

/// True when every label value forms a single 4-connected region.
pub fn is_four_connected(labels: &[u32], height: usize, width: usize) -> bool {
    let (_, count) = enforce(labels, height, width, 0);
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    count == distinct.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_disconnected_label_and_merges_specks() {
        #[rustfmt::skip]
        let labels = vec![
            0, 0, 1, 1,
            0, 2, 1, 1,
            1, 1, 1, 1,
            1, 1, 1, 0,
        ];
        // Label 0 appears in two places; the single pixels of label 2 and the
        // corner 0 are below the threshold.
        let (out, count) = enforce(&labels, 4, 4, 2);
        assert!(is_four_connected(&out, 4, 4));
        assert_eq!(count, 2);
        assert_eq!(out[5], out[6]);
        assert_eq!(out[15], out[14]);
        assert_eq!(out[0], out[4]);
    }

    #[test]
    fn zero_threshold_keeps_every_component() {
        let labels = vec![0, 1, 0, 1, 0, 1];
        let (out, count) = enforce(&labels, 1, 6, 0);
        assert_eq!(count, 6);
        assert_eq!(out, vec![0, 1, 2, 3, 4, 5]);
        assert!(!is_four_connected(&labels, 1, 6));
        assert!(is_four_connected(&out, 1, 6));
    }
}
