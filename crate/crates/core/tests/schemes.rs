use unistego::rng::seeded;
use unistego::{Alphabet, Scheme, Session, Symbol};

fn all_words(k: u32, len: usize) -> Vec<Vec<Symbol>> {
    let mut words = vec![Vec::new()];
    for _ in 0..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |s| {
                    let mut w = w.clone();
                    w.push(Symbol(s));
                    w
                })
            })
            .collect();
    }
    words
}

fn all_bit_strings(max_len: usize) -> Vec<Vec<bool>> {
    (0..=max_len)
        .flat_map(|len| (0..1u32 << len).map(move |v| (0..len).rev().map(|i| v >> i & 1 == 1).collect()))
        .collect()
}

#[test]
fn block_length_two_is_the_pair_scheme() {
    let abc = Alphabet::letters(3).unwrap();
    let pair = Session::new(&abc, Scheme::St2, 2);
    let block = Session::new(&abc, Scheme::Stn, 2);
    for len in [0, 2, 4, 6, 7] {
        for cover in all_words(3, len) {
            for hidden in all_bit_strings(3) {
                let a = pair.embed(&cover, hidden.clone(), seeded(1), seeded(2)).unwrap();
                let b = block.embed(&cover, hidden.clone(), seeded(1), seeded(2)).unwrap();
                assert_eq!(a.stego, b.stego);
                assert_eq!(a.bits_embedded, b.bits_embedded);
                assert_eq!(a.padding, b.padding);
            }
        }
    }
}

#[test]
fn exhaustive_round_trip_over_small_covers() {
    let abc = Alphabet::letters(3).unwrap();
    for n in [2, 3, 4] {
        let session = Session::new(&abc, Scheme::Stn, n);
        for len in 0..=7 {
            for cover in all_words(3, len) {
                for (i, hidden) in all_bit_strings(4).into_iter().enumerate() {
                    let res = session
                        .embed(&cover, hidden.clone(), seeded(i as u64), seeded(99))
                        .unwrap();
                    let bits = session.extract(&res.stego).unwrap().bits;
                    let consumed = res.bits_embedded as usize;
                    assert_eq!(bits.len() as u64, res.total_bits());
                    assert_eq!(bits[..consumed], hidden[..consumed]);
                    assert_eq!(bits[consumed..], res.padding[..]);

                    // blocks are rearranged in place, the tail is untouched
                    let full = len / n * n;
                    assert_eq!(res.stego[full..], cover[full..]);
                    for (c, s) in cover[..full].chunks(n).zip(res.stego[..full].chunks(n)) {
                        let (mut c, mut s) = (c.to_vec(), s.to_vec());
                        c.sort();
                        s.sort();
                        assert_eq!(c, s);
                    }
                }
            }
        }
    }
}

#[test]
fn wide_blocks_round_trip() {
    // class sizes beyond 64 and 128 bits
    let alphabet = Alphabet::numbered(40).unwrap();
    let mut rng = seeded(5);
    for n in [19, 20, 33, 34, 60] {
        let cover: Vec<Symbol> = (0..n * 20).map(|_| Symbol(rand::Rng::gen_range(&mut rng, 0..40))).collect();
        let hidden: Vec<bool> = (0..2000).map(|i| i % 3 == 0).collect();
        let session = Session::new(&alphabet, Scheme::Stn, n);
        let res = session.embed(&cover, hidden.clone(), seeded(n as u64), seeded(0)).unwrap();
        let bits = session.extract(&res.stego).unwrap().bits;
        let consumed = res.bits_embedded as usize;
        assert!(consumed > 0);
        assert_eq!(bits[..consumed], hidden[..consumed]);
    }
}

#[test]
fn seeds_fix_the_output() {
    let abc = Alphabet::letters(3).unwrap();
    let cover: Vec<Symbol> = (0..3000).map(|i| Symbol((i * 7 % 11 % 3) as u32)).collect();
    let session = Session::new(&abc, Scheme::Stn, 5);
    let run = |d, p| session.embed(&cover, vec![true, false, true], seeded(d), seeded(p)).unwrap();
    assert_eq!(run(1, 2), run(1, 2));
    assert_ne!(run(1, 2).stego, run(3, 2).stego);
    assert_ne!(run(1, 2).stego, run(1, 4).stego);
}
