//! Test-only normal distribution, independent of the crate's `erfc` path:
//! a positive-term erf series below z = 3, a continued fraction above.

use std::f64::consts::{PI, SQRT_2};

fn erfc_oracle(z: f64) -> f64 {
    if z < 0.0 {
        return 2.0 - erfc_oracle(-z);
    }
    if z < 3.0 {
        // erf(z) = 2/sqrt(pi) e^{-z^2} sum_n 2^n z^{2n+1} / (1*3*...*(2n+1))
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        while term > 1e-18 * sum {
            n += 1.0;
            term *= 2.0 * z * z / (2.0 * n + 1.0);
            sum += term;
        }
        1.0 - 2.0 / PI.sqrt() * (-z * z).exp() * sum
    } else {
        // erfc(z) = e^{-z^2}/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
        let mut tail = z;
        for k in (1..=300).rev() {
            tail = z + (k as f64 / 2.0) / tail;
        }
        (-z * z).exp() / PI.sqrt() / tail
    }
}

pub fn phi(x: f64) -> f64 {
    0.5 * erfc_oracle(-x / SQRT_2)
}

pub fn phi_inv(q: f64) -> f64 {
    if q > 0.5 {
        return -phi_inv(1.0 - q);
    }
    let (mut lo, mut hi) = (-40.0_f64, 0.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `G_mu(alpha)` with exact endpoint limits.
pub fn gaussian_tradeoff(mu: f64, alpha: f64) -> f64 {
    if alpha <= 0.0 {
        1.0
    } else if alpha >= 1.0 {
        0.0
    } else {
        phi(phi_inv(1.0 - alpha) - mu)
    }
}

/// (x, Phi(x)) from a 40-digit mpmath evaluation.
pub const PHI_TABLE: &[(f64, f64)] = &[
    (-8.0, 0.00000000000000062209605742717841235),
    (-7.75, 0.0000000000000045946274357785954602),
    (-7.5, 0.000000000000031908916729108962278),
    (-7.25, 0.00000000000020838581586720694312),
    (-7.0, 0.0000000000012798125438858350044),
    (-6.75, 0.0000000000073922577780178224195),
    (-6.5, 0.000000000040160005838591178083),
    (-6.25, 0.00000000020522634252189388816),
    (-6.0, 0.0000000009865876450376981407),
    (-5.75, 0.0000000044621724539016118731),
    (-5.5, 0.000000018989562465887719384),
    (-5.25, 0.000000076049605164887142511),
    (-5.0, 0.00000028665157187919391167),
    (-4.75, 0.0000010170832425687031713),
    (-4.5, 0.0000033976731247300604017),
    (-4.25, 0.000010688525774934420469),
    (-4.0, 0.000031671241833119921254),
    (-3.75, 0.000088417285200803867818),
    (-3.5, 0.00023262907903552503635),
    (-3.25, 0.00057702504239076704292),
    (-3.0, 0.0013498980316300945267),
    (-2.75, 0.0029797632350545567543),
    (-2.5, 0.006209665325776135167),
    (-2.25, 0.012224472655044703153),
    (-2.0, 0.0227501319481792072),
    (-1.75, 0.040059156863817090419),
    (-1.5, 0.066807201268858066004),
    (-1.25, 0.10564977366685525769),
    (-1.0, 0.15865525393145705141),
    (-0.75, 0.22662735237686819933),
    (-0.5, 0.30853753872598689636),
    (-0.25, 0.40129367431707627576),
    (0.0, 0.5),
    (0.25, 0.59870632568292372424),
    (0.5, 0.69146246127401310364),
    (0.75, 0.77337264762313180067),
    (1.0, 0.84134474606854294859),
    (1.25, 0.89435022633314474231),
    (1.5, 0.933192798731141934),
    (1.75, 0.95994084313618290958),
    (2.0, 0.9772498680518207928),
    (2.25, 0.98777552734495529685),
    (2.5, 0.99379033467422386483),
    (2.75, 0.99702023676494544325),
    (3.0, 0.99865010196836990547),
    (3.25, 0.99942297495760923296),
    (3.5, 0.99976737092096447496),
    (3.75, 0.99991158271479919613),
    (4.0, 0.99996832875816688008),
    (4.25, 0.99998931147422506558),
    (4.5, 0.99999660232687526994),
    (4.75, 0.9999989829167574313),
    (5.0, 0.99999971334842812081),
    (5.25, 0.99999992395039483511),
    (5.5, 0.99999998101043753411),
    (5.75, 0.9999999955378275461),
    (6.0, 0.99999999901341235496),
    (6.25, 0.99999999979477365748),
    (6.5, 0.99999999995983999416),
    (6.75, 0.99999999999260774222),
    (7.0, 0.99999999999872018746),
    (7.25, 0.99999999999979161418),
    (7.5, 0.99999999999996809108),
    (7.75, 0.99999999999999540537),
    (8.0, 0.9999999999999993779),
];
