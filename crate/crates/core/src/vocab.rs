//! Value spaces of the categorical bounding-box attributes.
//!
//! Each category serializes as its human-readable label ("1/4", "x-large",
//! "lightning fast", ...) and maps to a dense state index for the network.

use std::fmt;

/// A finite, ordered value space.
pub trait Category: Copy + Eq + fmt::Debug + 'static {
    const ALL: &'static [Self];

    fn index(self) -> usize;
    fn label(self) -> &'static str;

    fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    fn from_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.label() == label)
    }

    fn labels() -> Vec<&'static str> {
        Self::ALL.iter().map(|c| c.label()).collect()
    }
}

macro_rules! categorical {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl Category for $name {
            const ALL: &'static [Self] = &[$($name::$variant),+];

            fn index(self) -> usize {
                self as usize
            }

            fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl serde::Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.label())
            }
        }

        impl<'de> serde::Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let label = String::deserialize(d)?;
                $name::from_label(&label).ok_or_else(|| {
                    serde::de::Error::custom(format!(
                        "unknown {} `{}`",
                        stringify!($name),
                        label
                    ))
                })
            }
        }
    };
}

categorical! {
    /// Share of a grid cell covered by a box.
    Intersection {
        Small => "small",
        Quarter => "1/4",
        Half => "1/2",
        ThreeQuarters => "3/4",
        Full => "full",
    }
}

categorical! {
    /// Box area relative to the class-wise size distribution.
    BoxSize {
        XSmall => "x-small",
        Small => "small",
        Medium => "medium",
        Large => "large",
        XLarge => "x-large",
    }
}

categorical! {
    Aspect {
        Portrait => "portrait",
        Landscape => "landscape",
        Square => "square",
    }
}

categorical! {
    /// Speed relative to the class-wise distribution of non-idle speeds.
    Velocity {
        Idle => "idle",
        Slow => "slow",
        Normal => "normal",
        Fast => "fast",
        VeryFast => "very fast",
        SuperFast => "super fast",
        LightningFast => "lightning fast",
    }
}

categorical! {
    /// Compass heading of the box center, north being up in the image.
    /// `Stationary` ("none") covers idle objects and first sightings.
    Direction {
        N => "N",
        NE => "NE",
        E => "E",
        SE => "SE",
        S => "S",
        SW => "SW",
        W => "W",
        NW => "NW",
        Stationary => "none",
    }
}

/// Number of object classes (MS-COCO ids `1..=80`).
pub const NUM_CLASSES: usize = 80;

/// MS-COCO id of `person`.
pub const PERSON_CLASS: u16 = 1;

/// Names of classes `1..=80`.
pub const CLASS_NAMES: [&str; NUM_CLASSES] = [
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train", "truck", "boat",
    "traffic light", "fire hydrant", "stop sign", "parking meter", "bench", "bird", "cat",
    "dog", "horse", "sheep", "cow", "elephant", "bear", "zebra", "giraffe", "backpack",
    "umbrella", "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard", "sports ball",
    "kite", "baseball bat", "baseball glove", "skateboard", "surfboard", "tennis racket",
    "bottle", "wine glass", "cup", "fork", "knife", "spoon", "bowl", "banana", "apple",
    "sandwich", "orange", "broccoli", "carrot", "hot dog", "pizza", "donut", "cake", "chair",
    "couch", "potted plant", "bed", "dining table", "toilet", "tv", "laptop", "mouse", "remote",
    "keyboard", "cell phone", "microwave", "oven", "toaster", "sink", "refrigerator", "book",
    "clock", "vase", "scissors", "teddy bear", "hair drier", "toothbrush",
];

/// Name of a class id, `None` outside `1..=80`.
pub fn class_name(class_id: u16) -> Option<&'static str> {
    CLASS_NAMES.get((class_id as usize).checked_sub(1)?).copied()
}

/// Class id of a name.
pub fn class_id(name: &str) -> Option<u16> {
    CLASS_NAMES.iter().position(|n| *n == name).map(|i| i as u16 + 1)
}
