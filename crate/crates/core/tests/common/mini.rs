//! Two-node instances written to a temporary directory.

use std::fs;

use tempfile::TempDir;

pub struct Mini {
    /// Undirected base capacity of a rail edge A-B; `None` means road only.
    pub rail_capacity: Option<f64>,
    /// `(origin, destination, tonnes)` in every period.
    pub demand: Vec<(&'static str, &'static str, f64)>,
    /// Adds a cheap new road fuel with this innovation coefficient.
    pub battery_alpha: Option<f64>,
    pub periods: Vec<i32>,
}

impl Default for Mini {
    fn default() -> Self {
        Mini { rail_capacity: None, demand: vec![("A", "B", 10.0)], battery_alpha: None, periods: vec![2023] }
    }
}

impl Mini {
    pub fn write(&self) -> TempDir {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        let last = self.periods.last().unwrap() + 4;
        let w = |name: &str, text: String| fs::write(p.join(name), text).unwrap();
        w(
            "instance.json",
            format!(
                r#"{{"name": "mini", "discount_factor": 0.96, "horizon": {{"first_year": {}, "last_year": {last}}},
"products": ["goods"], "fuel_groups": [{{"id": "established"}}, {{"id": "battery"}}], "max_modes": 2}}"#,
                self.periods[0]
            ),
        );
        w("nodes.csv", "id,name\nA,Alpha\nB,Beta\n".into());
        let road_fuels = if self.battery_alpha.is_some() { "Diesel;Battery" } else { "Diesel" };
        let mut arcs = format!("id,from,to,mode,route,length_km,fuels\nroad-A-B,A,B,road,,100,{road_fuels}\nroad-B-A,B,A,road,,100,{road_fuels}\n");
        let mut fuels = "mode,fuel,group,is_new,lifespan_years,base_share\nroad,Diesel,established,0,10,1.0\n".to_string();
        let mut vehicles = "id,mode,products\ntruck,road,goods\n".to_string();
        let mut fleet = "mode,lifespan_years,max_decrease\nroad,10,0.5\n".to_string();
        let mut costs = "mode,fuel,product,year,cost_per_tkm\n".to_string();
        let mut emissions = "mode,fuel,product,year,kg_per_tkm\n".to_string();
        let mut demand = "origin,destination,product,year,amount\n".to_string();
        for &y in &self.periods {
            costs.push_str(&format!("road,Diesel,goods,{y},1.0\n"));
            emissions.push_str(&format!("road,Diesel,goods,{y},0.08\n"));
            if self.battery_alpha.is_some() {
                costs.push_str(&format!("road,Battery,goods,{y},0.4\n"));
                emissions.push_str(&format!("road,Battery,goods,{y},0.0\n"));
            }
            if self.rail_capacity.is_some() {
                costs.push_str(&format!("rail,Diesel,goods,{y},0.3\n"));
                emissions.push_str(&format!("rail,Diesel,goods,{y},0.03\n"));
            }
            for &(o, d, amount) in &self.demand {
                demand.push_str(&format!("{o},{d},goods,{y},{amount}\n"));
            }
        }
        if let Some(alpha) = self.battery_alpha {
            fuels.push_str("road,Battery,battery,1,10,0\n");
            w("adoption.csv", format!("mode,fuel,start_year,potential,alpha,beta\nroad,Battery,2020,0.9,{alpha},0.5\n"));
        }
        if let Some(cap) = self.rail_capacity {
            arcs.push_str("rail-A-B,A,B,rail,,100,Diesel\nrail-B-A,B,A,rail,,100,Diesel\n");
            fuels.push_str("rail,Diesel,established,0,20,1.0\n");
            vehicles.push_str("train,rail,goods\n");
            fleet.push_str("rail,20,0.5\n");
            w("edges.csv", format!("from,to,mode,route,base_capacity\nA,B,rail,,{cap}\n"));
        }
        let mut time = "year,period,carbon_price,emission_target\n".to_string();
        for y in self.periods[0]..=last {
            time.push_str(&format!("{y},{},100,\n", u8::from(self.periods.contains(&y))));
        }
        w("arcs.csv", arcs);
        w("fuels.csv", fuels);
        w("vehicles.csv", vehicles);
        w("fleet.csv", fleet);
        w("costs.csv", costs);
        w("emissions.csv", emissions);
        w("demand.csv", demand);
        w("time.csv", time);
        dir
    }
}
