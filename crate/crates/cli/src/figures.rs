//! Which subcommand and config reproduce each figure.

pub struct Figure {
    pub id: &'static str,
    pub command: &'static str,
    pub config: Option<&'static str>,
    pub about: &'static str,
}

pub const FIGURES: &[Figure] = &[
    Figure {
        id: "fig4",
        command: "complexity",
        config: None,
        about: "multiplications per iteration against M = N",
    },
    Figure {
        id: "fig5",
        command: "curve",
        config: Some("configs/fig5.cfg"),
        about: "SM-NLMS fixed bounds against NLMS",
    },
    Figure {
        id: "fig6",
        command: "curve",
        config: Some("configs/fig6.cfg"),
        about: "BEACON fixed bounds against RLS and MMSE",
    },
    Figure {
        id: "fig7",
        command: "curve",
        config: Some("configs/fig7.cfg"),
        about: "SM-NLMS time-varying bound",
    },
    Figure {
        id: "fig8",
        command: "curve",
        config: Some("configs/fig8.cfg"),
        about: "BEACON time-varying bound",
    },
    Figure {
        id: "fig9",
        command: "mse-vs-snr",
        config: Some("configs/fig9.cfg"),
        about: "SM-NLMS MSE against SNR",
    },
    Figure {
        id: "fig10",
        command: "mse-vs-snr",
        config: Some("configs/fig10.cfg"),
        about: "BEACON MSE against SNR",
    },
    Figure {
        id: "fig11",
        command: "curve",
        config: Some("configs/fig11.cfg"),
        about: "SM-NLMS under Clarke fading",
    },
    Figure {
        id: "fig12",
        command: "curve",
        config: Some("configs/fig12.cfg"),
        about: "BEACON under Clarke fading",
    },
    Figure {
        id: "fig13",
        command: "ber",
        config: Some("configs/fig13.cfg"),
        about: "BER with LMMSE detection",
    },
    Figure {
        id: "fig14",
        command: "validate-analysis",
        config: Some("configs/fig14.cfg"),
        about: "probability of update",
    },
    Figure {
        id: "fig15",
        command: "validate-analysis",
        config: Some("configs/fig15.cfg"),
        about: "SM-NLMS steady-state excess MSE",
    },
    Figure {
        id: "fig16",
        command: "validate-analysis",
        config: Some("configs/fig16.cfg"),
        about: "BEACON steady-state excess MSE",
    },
];

pub fn render() -> String {
    let mut out = String::new();
    for f in FIGURES {
        let config = f.config.map(|c| format!("--config {c}")).unwrap_or_default();
        out.push_str(&format!("{:<6} {:<18} {:<30} {}\n", f.id, f.command, config, f.about));
    }
    out
}
